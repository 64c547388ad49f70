#include "cardan/grille.hpp"

#include <cmath>
#include <string>

#include "cardan/error.hpp"
#include "digest.hpp"

namespace cardan {

CardanGrille::CardanGrille(BinaryMask cells, std::optional<Bytes> key, double density)
    : cells_(std::move(cells)), key_(std::move(key)), density_(density) {}

PaddedGrille::PaddedGrille(CardanGrille source, int image_height, int image_width, Offset offset)
    : source_(std::move(source)), offset_(offset), cells_(image_height, image_width) {
  const int rows = source_.rows();
  const int cols = source_.cols();
  if (offset.row < 0 || offset.col < 0 || offset.row + rows > image_height ||
      offset.col + cols > image_width) {
    throw ShapeError("grille window " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " at offset (" + std::to_string(offset.row) + ", " +
                     std::to_string(offset.col) + ") overflows " + std::to_string(image_height) +
                     "x" + std::to_string(image_width) + " image by (" +
                     std::to_string(std::max(0, offset.row + rows - image_height)) + ", " +
                     std::to_string(std::max(0, offset.col + cols - image_width)) + ")");
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (source_.cells().at(r, c)) {
        cells_.set(offset.row + r, offset.col + c, true);
        support_.emplace_back(offset.row + r, offset.col + c);
      }
    }
  }
}

CardanGrille derive_grille(std::span<const std::uint8_t> key, int rows, int cols, double density) {
  if (key.empty()) {
    throw InvalidArgument("grille key must not be empty");
  }
  if (rows < 1 || cols < 1) {
    throw InvalidArgument("grille shape must be at least 1x1");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw InvalidArgument("grille density must lie in (0, 1]");
  }
  const auto threshold = static_cast<unsigned>(std::floor(density * 256.0));

  BinaryMask cells(rows, cols);
  const std::size_t total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  Bytes block_input(key.begin(), key.end());
  block_input.resize(key.size() + 8);

  detail::Sha256Digest block{};
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t within = k % block.size();
    if (within == 0) {
      const std::uint64_t counter = k / block.size();
      for (int i = 0; i < 8; ++i) {
        block_input[key.size() + static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(counter >> (56 - 8 * i));
      }
      block = detail::sha256(block_input);
    }
    cells.set(static_cast<int>(k / static_cast<std::size_t>(cols)),
              static_cast<int>(k % static_cast<std::size_t>(cols)), block[within] < threshold);
  }
  return CardanGrille(std::move(cells), Bytes(key.begin(), key.end()), density);
}

CardanGrille load_grille(BinaryMask cells) {
  if (cells.height() < 1 || cells.width() < 1) {
    throw InvalidArgument("grille must have at least one cell");
  }
  for (const auto v : cells.cells()) {
    if (v > 1) throw InvalidArgument("grille cells must be 0 or 1");
  }
  const double density = static_cast<double>(cells.popcount()) /
                         static_cast<double>(cells.cells().size());
  return CardanGrille(std::move(cells), std::nullopt, density);
}

Offset centered_offset(int rows, int cols, int image_height, int image_width) noexcept {
  return Offset{(image_height - rows) / 2, (image_width - cols) / 2};
}

PaddedGrille zero_pad(const CardanGrille& grille, int image_height, int image_width,
                      std::optional<Offset> offset) {
  const Offset at =
      offset.value_or(centered_offset(grille.rows(), grille.cols(), image_height, image_width));
  return PaddedGrille(grille, image_height, image_width, at);
}

std::size_t capacity(const CardanGrille& grille, int channels, int si) {
  if (si < 0 || si > 7) {
    throw InvalidArgument("stability index must lie in 0..7, got " + std::to_string(si));
  }
  if (channels < 1) {
    throw InvalidArgument("channel count must be positive");
  }
  return grille.popcount() * static_cast<std::size_t>(channels) * static_cast<std::size_t>(8 - si);
}

std::size_t capacity(const PaddedGrille& padded, int channels, int si) {
  return capacity(padded.source(), channels, si);
}

OverlapReport check_overlap(const PaddedGrille& padded, const CompletionMask& mask) {
  if (mask.cells.height() != padded.height() || mask.cells.width() != padded.width()) {
    throw ShapeError("completion mask " + std::to_string(mask.cells.height()) + "x" +
                     std::to_string(mask.cells.width()) + " does not match grille image " +
                     std::to_string(padded.height()) + "x" + std::to_string(padded.width()));
  }
  OverlapReport report;
  report.grille_cells = padded.popcount();
  for (const auto& [r, c] : padded.support()) {
    if (mask.cells.at(r, c)) ++report.overlapping_cells;
  }
  return report;
}

std::string grille_fingerprint(const PaddedGrille& padded) {
  detail::Sha256 hasher;
  std::uint8_t dims[8];
  for (int i = 0; i < 4; ++i) {
    dims[i] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(padded.height()) >> (8 * i));
    dims[4 + i] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(padded.width()) >> (8 * i));
  }
  hasher.update(dims);
  hasher.update(padded.cells().cells());
  return detail::hex_prefix(hasher.finish(), 16);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

namespace {
int hex_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw InvalidArgument("hex string has odd length");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_value(hex[i]);
    const int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw InvalidArgument("invalid hex character in '" + std::string(hex) + "'");
    }
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

}  // namespace cardan
