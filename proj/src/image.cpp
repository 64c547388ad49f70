#include "cardan/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cardan/error.hpp"

namespace cardan {

Image::Image(ImageShape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.height < 0 || shape.width < 0 || shape.channels < 0) {
    throw ShapeError("negative image dimension");
  }
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill)
    : height_(height),
      width_(width),
      cells_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)),
             fill ? 1 : 0) {
  if (height < 0 || width < 0) {
    throw ShapeError("negative mask dimension");
  }
}

std::size_t BinaryMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::from_rows(const std::vector<std::string_view>& rows) {
  if (rows.empty()) {
    throw InvalidArgument("binary array has no rows");
  }
  const auto width = rows.front().size();
  if (width == 0) {
    throw InvalidArgument("binary array has empty rows");
  }
  BinaryMask mask(static_cast<int>(rows.size()), static_cast<int>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw InvalidArgument("binary array row " + std::to_string(r) + " has length " +
                            std::to_string(rows[r].size()) + ", expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const char ch = rows[r][c];
      if (ch != '0' && ch != '1') {
        throw InvalidArgument("non-binary entry '" + std::string(1, ch) + "' at row " +
                              std::to_string(r) + ", column " + std::to_string(c));
      }
      mask.set(static_cast<int>(r), static_cast<int>(c), ch == '1');
    }
  }
  return mask;
}

Rect central_region(int height, int width) {
  const int h = height / 2;
  const int w = width / 2;
  return Rect{(height - h) / 2, (width - w) / 2, h, w};
}

std::string_view to_string(CompletionMode mode) noexcept {
  return mode == CompletionMode::soft ? "soft" : "hard";
}

CompletionMode parse_completion_mode(std::string_view text) {
  if (text == "soft") return CompletionMode::soft;
  if (text == "hard") return CompletionMode::hard;
  throw InvalidArgument("unknown completion mode '" + std::string(text) + "' (expected soft|hard)");
}

std::uint8_t quantize(double value) noexcept {
  // std::round rounds half away from zero; the argument is non-negative after clamping.
  const double scaled = std::round((std::clamp(value, -1.0, 1.0) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

double dequantize(std::uint8_t value) noexcept { return static_cast<double>(value) / 127.5 - 1.0; }

Image quantize_image(const Image& image) {
  Image out = image;
  for (double& v : out.values()) {
    v = dequantize(quantize(v));
  }
  return out;
}

}  // namespace cardan
