#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cardan/dataset.hpp"
#include "cardan/grille.hpp"
#include "cardan/grille_document.hpp"
#include "cardan/inpainting.hpp"
#include "cardan/message_codec.hpp"
#include "cardan/models.hpp"

namespace cardan {

struct HideConfig {
  /// Secret material: key or cells, shape, density, offset and si.
  GrilleDocument grille;
  CompletionMode mode = CompletionMode::soft;
  LossWeights weights;
  int budget = 1000;
  int restarts = 1;
  std::uint64_t seed = 0;
  /// Region to complete; the central half-side square when unset.
  std::optional<Rect> region;

  /// Throws InvalidArgument on si, budget or restart values out of range.
  void validate() const;
};

struct HideResult {
  /// Already passed through 8-bit quantization: identical to what a lossless
  /// file holds.
  StegoImage stego;
  CorruptedCover cover;
  ExpandedCarrier carrier;
  CompletionMask mask;
  OverlapReport overlap;
  OptimizationResult optimization;
};

/// corrupt -> place grille -> expand message -> completion mask -> latent
/// search -> compositing -> quantize. Throws CapacityError before
/// any optimization when the message does not fit.
HideResult hide(const Image& cover, const SecretMessage& message, const HideConfig& config,
                const Generator& generator, const Discriminator& discriminator);

/// Model-free: places the grille over the stego pixels and decodes.
SecretMessage extract(const Image& stego, const GrilleDocument& grille, std::size_t expected_length);

/// Public run metadata written next to a stego file. Never contains the key,
/// the grille, si or the message.
struct StegoSidecar {
  std::string mode;
  int iterations = 0;
  int restarts = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string model_fingerprint;
  ImageShape shape;
  double best_total_loss = 0.0;

  std::string to_json() const;
};

/// Writes the stego raster and "<path>.json". Throws FormatError for lossy
/// extensions (JPEG, WebP, ...) before touching the disk.
void write_stego(const std::filesystem::path& path, const StegoImage& stego, const StegoSidecar& sidecar);

/// Reads a stego raster and extracts. Throws FormatError for lossy or
/// undecodable files.
SecretMessage extract_file(const std::filesystem::path& path, const GrilleDocument& grille,
                           std::size_t expected_length);

}  // namespace cardan
