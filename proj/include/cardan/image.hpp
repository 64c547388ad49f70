#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cardan {

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const ImageShape&) const = default;
};

/// Real-valued image in height x width x channel (interleaved) layout.
/// Pixel values live in [-1, 1]; see `quantize` for the 8-bit mapping.
class Image {
 public:
  Image() = default;
  explicit Image(ImageShape shape, double fill = 0.0);

  const ImageShape& shape() const noexcept { return shape_; }
  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  int channels() const noexcept { return shape_.channels; }

  std::size_t index(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(shape_.width) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(shape_.channels) +
           static_cast<std::size_t>(channel);
  }
  double& at(int row, int col, int channel) noexcept { return data_[index(row, col, channel)]; }
  double at(int row, int col, int channel) const noexcept {
    return data_[index(row, col, channel)];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  ImageShape shape_;
  std::vector<double> data_;
};

/// Binary (0/1) array of height x width.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 0);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::uint8_t at(int row, int col) const noexcept {
    return cells_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(col)];
  }
  void set(int row, int col, bool value) noexcept {
    cells_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col)] = value ? 1 : 0;
  }
  std::size_t popcount() const noexcept;
  std::span<const std::uint8_t> cells() const noexcept { return cells_; }

  /// Parses rows of '0'/'1' characters. Throws InvalidArgument on ragged
  /// rows or any other character.
  static BinaryMask from_rows(const std::vector<std::string_view>& rows);

  bool operator==(const BinaryMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct Offset {
  int row = 0;
  int col = 0;
  bool operator==(const Offset&) const = default;
};

/// Axis-aligned rectangle of pixels, top-left inclusive.
struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;

  bool contains(int r, int c) const noexcept {
    return r >= row && r < row + height && c >= col && c < col + width;
  }
  std::size_t area() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool fits_in(int image_height, int image_width) const noexcept {
    return row >= 0 && col >= 0 && height >= 0 && width >= 0 && row + height <= image_height &&
           col + width <= image_width;
  }
  bool operator==(const Rect&) const = default;
};

/// Central square of half the image side (32x32 inside 64x64).
Rect central_region(int height, int width);

/// 1 = keep the pixel of the corrupted image, 0 = fill it from the generator.
/// Broadcast across channels.
struct CompletionMask {
  BinaryMask cells;
};

enum class CompletionMode { soft, hard };

std::string_view to_string(CompletionMode mode) noexcept;
CompletionMode parse_completion_mode(std::string_view text);

/// [-1, 1] -> 0..255 via round((v + 1) * 127.5), half away from zero, clamped.
std::uint8_t quantize(double value) noexcept;
/// 0..255 -> [-1, 1], exact inverse of `quantize` on its image.
double dequantize(std::uint8_t value) noexcept;

/// Quantizes then dequantizes every value, i.e. what survives an 8-bit file.
Image quantize_image(const Image& image);

}  // namespace cardan
