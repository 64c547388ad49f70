#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cardan {

/// Plain comma-separated table without quoting; cells never contain commas
/// or newlines. Serialization is byte-stable: header line, one line per row,
/// LF terminated.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws FormatError if absent
  bool has_column(std::string_view name) const noexcept;
  double number(std::size_t row, std::string_view name) const;

  void add_row(std::vector<std::string> row);

  std::string to_string() const;
  static CsvTable parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static CsvTable load(const std::filesystem::path& path);

  bool operator==(const CsvTable&) const = default;
};

/// Fixed six-decimal rendering used by every experiment CSV.
std::string format_fixed(double value);

}  // namespace cardan
