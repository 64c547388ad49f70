#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cardan/image.hpp"

namespace cardan {

struct ImageRecord {
  Image pixels;
  std::string source;
};

using Dataset = std::vector<ImageRecord>;

/// Cover with its region removed. `image` is the display copy (region pixels
/// set to 0); `mask` is the soft completion mask, zero exactly on the region.
struct CorruptedCover {
  ImageRecord image;
  Rect region;
  CompletionMask mask;
};

/// Decodes every raster image in `directory` (sorted by file name), center
/// crops to a square, resamples to size x size and maps to [-1, 1].
/// Grayscale inputs are replicated when `channels` is 3. Undecodable files
/// are skipped and reported on stderr. Throws InvalidArgument when no file
/// could be used.
Dataset ingest(const std::filesystem::path& directory, int size, int channels = 3);

/// Reads one raster file and normalizes it like `ingest`. Throws FormatError
/// if the file cannot be decoded.
Image load_image(const std::filesystem::path& path, int size, int channels = 3);

/// Reads an 8-bit raster file verbatim (no crop or resize).
Image read_raster(const std::filesystem::path& path);

/// Writes an 8-bit raster; the encoder is chosen by extension. Throws
/// FormatError when encoding fails.
void write_raster(const std::filesystem::path& path, const Image& image);

/// Extensions whose codecs reproduce 8-bit pixels exactly.
bool is_lossless_extension(const std::filesystem::path& path);

/// Seeded procedural face-like images: a smooth radial background gradient
/// with a large ellipse, two small dark ellipses and a mouth band, all with
/// soft edges. Pure function of its arguments. Throws InvalidArgument for
/// count < 1.
Dataset synthesize(int count, int size, std::uint64_t seed, int channels = 3);

/// Throws ShapeError when the region falls outside the image.
CorruptedCover corrupt(const ImageRecord& record, const Rect& region);

}  // namespace cardan
