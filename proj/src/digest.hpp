#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace cardan::detail {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> data);

/// Incremental SHA-256 for data assembled from several pieces.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> data);
  Sha256Digest finish();

 private:
  struct State;
  State* state_;
};

std::string hex_prefix(const Sha256Digest& digest, std::size_t hex_digits);

}  // namespace cardan::detail
