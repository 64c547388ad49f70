#include "cardan/grille_document.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "cardan/error.hpp"

namespace cardan {

namespace {

constexpr std::string_view kMagic = "cardan-grille 1";

std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.empty() || text.back() != '\n') {
    throw FormatError("grille document must end with a newline");
  }
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      throw FormatError("grille document must use LF line endings");
    }
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto end = line.find(' ', start);
    const auto word = line.substr(start, end == std::string_view::npos ? end : end - start);
    if (word.empty()) throw FormatError("malformed line '" + std::string(line) + "'");
    words.push_back(word);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return words;
}

template <typename T>
T parse_number(std::string_view word, std::string_view field) {
  T value{};
  const auto* end = word.data() + word.size();
  const auto [ptr, ec] = std::from_chars(word.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("invalid " + std::string(field) + " value '" + std::string(word) + "'");
  }
  return value;
}

std::vector<std::string_view> expect_field(std::string_view line, std::string_view name,
                                           std::size_t values) {
  auto words = split_words(line);
  if (words.front() != name || words.size() != values + 1) {
    throw FormatError("expected '" + std::string(name) + "' line with " + std::to_string(values) +
                      " value(s), got '" + std::string(line) + "'");
  }
  words.erase(words.begin());
  return words;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  (void)ec;
  return std::string(buffer, ptr);
}

}  // namespace

GrilleDocument GrilleDocument::from_key(Bytes key, int rows, int cols, double density, int si) {
  GrilleDocument doc;
  doc.material = std::move(key);
  doc.rows = rows;
  doc.cols = cols;
  doc.density = density;
  doc.si = si;
  return doc;
}

GrilleDocument GrilleDocument::from_cells(BinaryMask cells, int si) {
  GrilleDocument doc;
  doc.rows = cells.height();
  doc.cols = cells.width();
  doc.density = cells.cells().empty()
                    ? 0.0
                    : static_cast<double>(cells.popcount()) / static_cast<double>(cells.cells().size());
  doc.material = std::move(cells);
  doc.si = si;
  return doc;
}

CardanGrille GrilleDocument::grille() const {
  if (const auto* key = std::get_if<Bytes>(&material)) {
    return derive_grille(*key, rows, cols, density);
  }
  const auto& cells = std::get<BinaryMask>(material);
  if (cells.height() != rows || cells.width() != cols) {
    throw ShapeError("grille cells do not match the declared shape");
  }
  return load_grille(cells);
}

PaddedGrille GrilleDocument::place(int image_height, int image_width) const {
  return zero_pad(grille(), image_height, image_width, offset);
}

std::string GrilleDocument::to_text() const {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "shape " << rows << ' ' << cols << '\n';
  out << "density " << format_double(density) << '\n';
  if (offset) {
    out << "offset " << offset->row << ' ' << offset->col << '\n';
  } else {
    out << "offset center\n";
  }
  out << "si " << si << '\n';
  if (length) out << "length " << *length << '\n';
  if (const auto* key = std::get_if<Bytes>(&material)) {
    out << "key " << to_hex(*key) << '\n';
  } else {
    const auto& cells = std::get<BinaryMask>(material);
    out << "cells\n";
    for (int r = 0; r < cells.height(); ++r) {
      for (int c = 0; c < cells.width(); ++c) out << (cells.at(r, c) ? '1' : '0');
      out << '\n';
    }
  }
  return out.str();
}

GrilleDocument GrilleDocument::parse(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  auto next = [&]() -> std::string_view {
    if (i >= lines.size()) throw FormatError("grille document is truncated");
    return lines[i++];
  };

  if (next() != kMagic) throw FormatError("not a cardan-grille version 1 document");
  GrilleDocument doc;
  {
    const auto v = expect_field(next(), "shape", 2);
    doc.rows = parse_number<int>(v[0], "shape");
    doc.cols = parse_number<int>(v[1], "shape");
    if (doc.rows < 1 || doc.cols < 1) throw FormatError("grille shape must be positive");
  }
  doc.density = parse_number<double>(expect_field(next(), "density", 1)[0], "density");
  {
    const auto line = next();
    if (line == "offset center") {
      doc.offset.reset();
    } else {
      const auto v = expect_field(line, "offset", 2);
      doc.offset = Offset{parse_number<int>(v[0], "offset"), parse_number<int>(v[1], "offset")};
    }
  }
  doc.si = parse_number<int>(expect_field(next(), "si", 1)[0], "si");
  if (doc.si < 0 || doc.si > 7) throw FormatError("si must lie in 0..7");

  auto line = next();
  if (line.starts_with("length ")) {
    doc.length = parse_number<std::size_t>(expect_field(line, "length", 1)[0], "length");
    line = next();
  }
  if (line.starts_with("key ")) {
    try {
      doc.material = from_hex(expect_field(line, "key", 1)[0]);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
  } else if (line == "cells") {
    std::vector<std::string_view> rows;
    for (int r = 0; r < doc.rows; ++r) rows.push_back(next());
    try {
      doc.material = BinaryMask::from_rows(rows);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
    if (std::get<BinaryMask>(doc.material).width() != doc.cols) {
      throw FormatError("cell rows do not match the declared width");
    }
  } else {
    throw FormatError("expected 'key' or 'cells', got '" + std::string(line) + "'");
  }
  if (i != lines.size()) throw FormatError("trailing content after grille material");
  return doc;
}

void GrilleDocument::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write grille document " + path.string());
  out << to_text();
}

GrilleDocument GrilleDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read grille document " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace cardan
