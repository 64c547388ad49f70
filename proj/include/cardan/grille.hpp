#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardan/image.hpp"

namespace cardan {

using Bytes = std::vector<std::uint8_t>;

/// Keyed binary mask marking the writable cells inside the corrupted region.
/// A 1-cell is a position that carries message bits.
class CardanGrille {
 public:
  CardanGrille(BinaryMask cells, std::optional<Bytes> key, double density);

  const BinaryMask& cells() const noexcept { return cells_; }
  int rows() const noexcept { return cells_.height(); }
  int cols() const noexcept { return cells_.width(); }
  /// Absent for grilles loaded from explicit cells.
  const std::optional<Bytes>& key() const noexcept { return key_; }
  double density() const noexcept { return density_; }
  std::size_t popcount() const noexcept { return cells_.popcount(); }
  /// A grille without any 1-cell cannot carry a message.
  bool usable() const noexcept { return popcount() > 0; }

  bool operator==(const CardanGrille&) const = default;

 private:
  BinaryMask cells_;
  std::optional<Bytes> key_;
  double density_;
};

/// The grille placed inside a full-size image: zero everywhere outside the
/// window at `offset`, equal to the source cells inside it.
class PaddedGrille {
 public:
  PaddedGrille(CardanGrille source, int image_height, int image_width, Offset offset);

  const BinaryMask& cells() const noexcept { return cells_; }
  const Offset& offset() const noexcept { return offset_; }
  const CardanGrille& source() const noexcept { return source_; }
  int height() const noexcept { return cells_.height(); }
  int width() const noexcept { return cells_.width(); }
  std::size_t popcount() const noexcept { return support_.size(); }

  /// 1-cells in row-major order, as (row, col) image coordinates.
  std::span<const std::pair<int, int>> support() const noexcept { return support_; }
  bool on_support(int row, int col) const noexcept { return cells_.at(row, col) != 0; }

 private:
  CardanGrille source_;
  Offset offset_;
  BinaryMask cells_;
  std::vector<std::pair<int, int>> support_;
};

inline constexpr double kDefaultGrilleDensity = 0.5;

/// Derives the grille cells from a key through a SHA-256 counter stream.
///
/// Block i of the stream is SHA-256(key || u64_be(i)) for i = 0, 1, 2, ...;
/// the blocks are concatenated and byte k of the stream decides cell
/// (k / cols, k % cols). The cell is 1 iff that byte is below
/// floor(density * 256). Throws InvalidArgument for an empty key, a
/// non-positive shape or density outside (0, 1].
CardanGrille derive_grille(std::span<const std::uint8_t> key, int rows, int cols,
                           double density = kDefaultGrilleDensity);

/// Wraps explicit cells verbatim; the key is recorded as absent and the
/// density as the observed fraction of 1-cells.
CardanGrille load_grille(BinaryMask cells);

/// Top-left offset that centers an (rows, cols) window in the image (floor division).
Offset centered_offset(int rows, int cols, int image_height, int image_width) noexcept;

/// Places the grille at `offset` (centered when omitted). Throws ShapeError
/// reporting the overflow when the window does not fit.
PaddedGrille zero_pad(const CardanGrille& grille, int image_height, int image_width,
                      std::optional<Offset> offset = std::nullopt);

/// Writable bits: popcount * channels * (8 - si). Throws InvalidArgument for si outside 0..7.
std::size_t capacity(const CardanGrille& grille, int channels, int si);
std::size_t capacity(const PaddedGrille& padded, int channels, int si);

struct OverlapReport {
  /// Grille 1-cells that land on kept (M = 1) pixels.
  std::size_t overlapping_cells = 0;
  std::size_t grille_cells = 0;

  bool fully_inside_completion_region() const noexcept { return overlapping_cells == 0; }
};

/// Counts grille cells lying outside the region to be completed.
OverlapReport check_overlap(const PaddedGrille& padded, const CompletionMask& mask);

/// Short public identifier of the grille material: first 16 hex digits of
/// SHA-256 over the padded cell layout. Reveals nothing usable about the key.
std::string grille_fingerprint(const PaddedGrille& padded);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts upper or lower case; throws InvalidArgument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

}  // namespace cardan
