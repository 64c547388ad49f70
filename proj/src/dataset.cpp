#include "cardan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cardan/error.hpp"
#include "cardan/rng.hpp"

namespace cardan {

namespace {

Image from_mat(const cv::Mat& bgr_or_gray, int channels) {
  cv::Mat source;
  if (bgr_or_gray.channels() == 4) {
    cv::cvtColor(bgr_or_gray, source, cv::COLOR_BGRA2BGR);
  } else {
    source = bgr_or_gray;
  }
  cv::Mat converted;
  if (channels == 1 && source.channels() == 3) {
    cv::cvtColor(source, converted, cv::COLOR_BGR2GRAY);
  } else if (channels == 3 && source.channels() == 1) {
    cv::cvtColor(source, converted, cv::COLOR_GRAY2RGB);
  } else if (channels == 3) {
    cv::cvtColor(source, converted, cv::COLOR_BGR2RGB);
  } else {
    converted = source;
  }
  Image image({converted.rows, converted.cols, channels});
  for (int r = 0; r < converted.rows; ++r) {
    const auto* row = converted.ptr<std::uint8_t>(r);
    for (int c = 0; c < converted.cols; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        image.at(r, c, ch) = dequantize(row[c * channels + ch]);
      }
    }
  }
  return image;
}

cv::Mat to_mat(const Image& image) {
  const int channels = image.channels();
  if (channels != 1 && channels != 3) throw FormatError("only 1- or 3-channel images can be written");
  cv::Mat mat(image.height(), image.width(), channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int r = 0; r < image.height(); ++r) {
    auto* row = mat.ptr<std::uint8_t>(r);
    for (int c = 0; c < image.width(); ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        // RGB in memory, BGR for OpenCV.
        const int target = channels == 3 ? 2 - ch : ch;
        row[c * channels + target] = quantize(image.at(r, c, ch));
      }
    }
  }
  return mat;
}

cv::Mat decode(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) return mat;
  if (mat.depth() != CV_8U) {
    cv::Mat scaled;
    mat.convertTo(scaled, CV_8U, mat.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
    mat = scaled;
  }
  return mat;
}

Image normalize(const cv::Mat& mat, int size, int channels) {
  const int side = std::min(mat.rows, mat.cols);
  const cv::Rect crop((mat.cols - side) / 2, (mat.rows - side) / 2, side, side);
  cv::Mat resized;
  cv::resize(mat(crop), resized, cv::Size(size, size), 0, 0,
             side >= size ? cv::INTER_AREA : cv::INTER_LINEAR);
  return from_mat(resized, channels);
}

void check_channels(int channels) {
  if (channels != 1 && channels != 3) throw InvalidArgument("channels must be 1 or 3");
}

}  // namespace

Image load_image(const std::filesystem::path& path, int size, int channels) {
  check_channels(channels);
  if (size < 1) throw InvalidArgument("target size must be positive");
  const cv::Mat mat = decode(path);
  if (mat.empty()) throw FormatError("cannot decode image " + path.string());
  return normalize(mat, size, channels);
}

Image read_raster(const std::filesystem::path& path) {
  const cv::Mat mat = decode(path);
  if (mat.empty()) throw FormatError("cannot decode image " + path.string());
  return from_mat(mat, mat.channels() == 1 ? 1 : 3);
}

void write_raster(const std::filesystem::path& path, const Image& image) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), to_mat(image));
  } catch (const cv::Exception& e) {
    throw FormatError("cannot encode " + path.string() + ": " + e.what());
  }
  if (!ok) throw FormatError("cannot write image " + path.string());
}

bool is_lossless_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".bmp" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm" ||
         ext == ".tif" || ext == ".tiff";
}

Dataset ingest(const std::filesystem::path& directory, int size, int channels) {
  check_channels(channels);
  if (!std::filesystem::is_directory(directory)) {
    throw InvalidArgument("not a directory: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Dataset dataset;
  for (const auto& file : files) {
    const cv::Mat mat = decode(file);
    if (mat.empty()) {
      std::cerr << "ingest: skipping undecodable file " << file.string() << '\n';
      continue;
    }
    dataset.push_back(ImageRecord{normalize(mat, size, channels), file.filename().string()});
  }
  if (dataset.empty()) {
    throw InvalidArgument("no usable images in " + directory.string());
  }
  return dataset;
}

namespace {

double smoothstep_edge(double distance, double softness) {
  // 1 inside (distance < 1), 0 outside, smooth transition of width `softness`.
  const double t = std::clamp((1.0 - distance) / softness + 0.5, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double ellipse_distance(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx;
  const double dy = (y - cy) / ry;
  return std::sqrt(dx * dx + dy * dy);
}

struct Palette {
  double background_inner[3];
  double background_outer[3];
  double face[3];
  double feature[3];
};

}  // namespace

Dataset synthesize(int count, int size, std::uint64_t seed, int channels) {
  check_channels(channels);
  if (count < 1) throw InvalidArgument("synthetic dataset needs at least one image");
  if (size < 4) throw InvalidArgument("synthetic image size must be at least 4");

  Dataset dataset;
  dataset.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    Palette p{};
    for (int ch = 0; ch < 3; ++ch) {
      p.background_inner[ch] = rng.uniform(-0.2, 0.9);
      p.background_outer[ch] = rng.uniform(-1.0, 0.0);
      p.face[ch] = rng.uniform(0.1, 0.9);
      p.feature[ch] = rng.uniform(-1.0, -0.5);
    }
    const double cx = rng.uniform(0.45, 0.55);
    const double cy = rng.uniform(0.45, 0.55);
    const double face_rx = rng.uniform(0.22, 0.32);
    const double face_ry = rng.uniform(0.30, 0.40);
    const double eye_dx = rng.uniform(0.08, 0.12);
    const double eye_y = cy - rng.uniform(0.06, 0.12);
    const double eye_r = rng.uniform(0.03, 0.05);
    const double mouth_y = cy + rng.uniform(0.12, 0.18);
    const double mouth_rx = rng.uniform(0.07, 0.12);
    const double light = rng.uniform(-0.3, 0.3);

    Image image({size, size, channels});
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double x = (c + 0.5) / size;
        const double y = (r + 0.5) / size;
        const double radial = std::clamp(std::hypot(x - 0.5, y - 0.5) / 0.7071, 0.0, 1.0);
        const double face = smoothstep_edge(ellipse_distance(x, y, cx, cy, face_rx, face_ry), 0.15);
        const double eyes =
            std::max(smoothstep_edge(ellipse_distance(x, y, cx - eye_dx, eye_y, eye_r, eye_r * 0.7), 0.4),
                     smoothstep_edge(ellipse_distance(x, y, cx + eye_dx, eye_y, eye_r, eye_r * 0.7), 0.4));
        const double mouth = smoothstep_edge(ellipse_distance(x, y, cx, mouth_y, mouth_rx, 0.025), 0.4);
        const double shade = 1.0 + light * (x - cx);
        double rgb[3];
        for (int ch = 0; ch < 3; ++ch) {
          const double background =
              p.background_inner[ch] * (1.0 - radial) + p.background_outer[ch] * radial;
          double v = background * (1.0 - face) + p.face[ch] * shade * face;
          v = v * (1.0 - eyes) + p.feature[ch] * eyes;
          v = v * (1.0 - mouth) + (p.feature[ch] * 0.5 + 0.1) * mouth;
          rgb[ch] = std::clamp(v, -1.0, 1.0);
        }
        if (channels == 3) {
          for (int ch = 0; ch < 3; ++ch) image.at(r, c, ch) = rgb[ch];
        } else {
          image.at(r, c, 0) = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
        }
      }
    }
    dataset.push_back(ImageRecord{std::move(image), "synthetic-" + std::to_string(n)});
  }
  return dataset;
}

CorruptedCover corrupt(const ImageRecord& record, const Rect& region) {
  const Image& src = record.pixels;
  if (!region.fits_in(src.height(), src.width()) || region.height < 1 || region.width < 1) {
    throw ShapeError("corruption region (" + std::to_string(region.row) + ", " + std::to_string(region.col) +
                     ", " + std::to_string(region.height) + "x" + std::to_string(region.width) +
                     ") is outside the " + std::to_string(src.height()) + "x" + std::to_string(src.width()) +
                     " image");
  }
  CorruptedCover cover{record, region, CompletionMask{BinaryMask(src.height(), src.width(), 1)}};
  for (int r = region.row; r < region.row + region.height; ++r) {
    for (int c = region.col; c < region.col + region.width; ++c) {
      cover.mask.cells.set(r, c, false);
      for (int ch = 0; ch < src.channels(); ++ch) cover.image.pixels.at(r, c, ch) = 0.0;
    }
  }
  return cover;
}

}  // namespace cardan
