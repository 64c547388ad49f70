#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cardan/grille.hpp"

namespace cardan {

/// Shared secret material exchanged between sender and receiver.
///
/// Text form (ASCII, LF line endings, every line terminated, fields in this order):
///
///     cardan-grille 1
///     shape <rows> <cols>
///     density <decimal>
///     offset <row> <col>        or   offset center
///     si <0..7>
///     length <bits>             (optional)
///     key <lowercase hex>       or   cells
///                                    <rows lines of '0'/'1', each <cols> long>
///
/// `density` is written in shortest round-trip decimal form. For explicit
/// cells it is informational and the cells are used verbatim.
struct GrilleDocument {
  std::variant<Bytes, BinaryMask> material;
  int rows = 0;
  int cols = 0;
  double density = kDefaultGrilleDensity;
  std::optional<Offset> offset;
  int si = 7;
  std::optional<std::size_t> length;

  static GrilleDocument from_key(Bytes key, int rows, int cols, double density, int si);
  static GrilleDocument from_cells(BinaryMask cells, int si);

  bool has_key() const noexcept { return std::holds_alternative<Bytes>(material); }

  CardanGrille grille() const;
  PaddedGrille place(int image_height, int image_width) const;

  std::string to_text() const;
  /// Throws FormatError on any deviation from the layout above.
  static GrilleDocument parse(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static GrilleDocument load(const std::filesystem::path& path);

  bool operator==(const GrilleDocument&) const = default;
};

}  // namespace cardan
