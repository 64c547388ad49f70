#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cardan/grille.hpp"
#include "cardan/image.hpp"
#include "cardan/message_codec.hpp"
#include "cardan/rng.hpp"

namespace testing {

using namespace cardan;

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(CARDAN_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Image random_image(Rng& rng, ImageShape shape) {
  Image img(shape);
  for (auto& v : img.values()) v = rng.uniform(-1.0, 1.0);
  return img;
}

inline Bytes random_key(Rng& rng) {
  Bytes key(1 + rng.below(24));
  for (auto& b : key) b = static_cast<std::uint8_t>(rng.below(256));
  return key;
}

inline SecretMessage random_message(Rng& rng, std::size_t bits) {
  std::vector<std::uint8_t> v(bits);
  for (auto& b : v) b = rng.bit() ? 1 : 0;
  return SecretMessage(std::move(v));
}

inline BinaryMask random_mask(Rng& rng, int rows, int cols, double p = 0.5) {
  BinaryMask m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m.set(r, c, rng.uniform() < p);
  return m;
}

// Random padded grille fitting in an h x w image, at a random valid offset.
inline PaddedGrille random_padded(Rng& rng, int h, int w, double density = 0.5) {
  const int a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
  const int b = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
  const Offset off{static_cast<int>(rng.below(static_cast<std::uint64_t>(h - a + 1))),
                   static_cast<int>(rng.below(static_cast<std::uint64_t>(w - b + 1)))};
  return zero_pad(derive_grille(random_key(rng), a, b, density), h, w, off);
}

}  // namespace testing
