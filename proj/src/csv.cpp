#include "cardan/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cardan/error.hpp"

namespace cardan {

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(',', start);
    cells.emplace_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw FormatError("CSV has no column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const noexcept {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const auto& cell = rows.at(row).at(column(name));
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw FormatError("CSV cell '" + cell + "' in column '" + std::string(name) + "' is not a number");
  }
  return value;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw FormatError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::string out;
  auto append = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += cells[i];
    }
    out.push_back('\n');
  };
  append(columns);
  for (const auto& row : rows) append(row);
  return out;
}

CsvTable CsvTable::parse(std::string_view text) {
  CsvTable table;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    if (header) {
      table.columns = split(line);
      header = false;
    } else {
      auto cells = split(line);
      if (cells.size() != table.columns.size()) {
        throw FormatError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(table.columns.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (header) throw FormatError("CSV input is empty");
  return table;
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_string();
}

CsvTable CsvTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

}  // namespace cardan
