#include "cardan/pipeline.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "cardan/error.hpp"

namespace cardan {

void HideConfig::validate() const {
  if (grille.si < 0 || grille.si > 7) throw InvalidArgument("si must lie in 0..7");
  if (budget < 1) throw InvalidArgument("iteration budget must be at least 1");
  if (restarts < 1) throw InvalidArgument("restart count must be at least 1");
}

HideResult hide(const Image& cover, const SecretMessage& message, const HideConfig& config,
                const Generator& generator, const Discriminator& discriminator) {
  config.validate();
  if (generator.output_shape() != cover.shape()) {
    throw ShapeError("cover shape does not match the generator output shape");
  }
  const Rect region = config.region.value_or(central_region(cover.height(), cover.width()));
  auto corrupted = corrupt(ImageRecord{cover, "cover"}, region);
  const PaddedGrille padded = config.grille.place(cover.height(), cover.width());
  auto carrier = expand_message(message, corrupted.image.pixels, padded, config.grille.si);
  auto mask = build_completion_mask(region, carrier.padded, config.mode);
  const auto overlap = check_overlap(carrier.padded, corrupted.mask);

  const InpaintingObjective objective(carrier.image, mask, carrier.image, carrier.padded, config.weights,
                                      generator, discriminator);
  OptimizerOptions options;
  options.budget = config.budget;
  options.restarts = config.restarts;
  options.seed = config.seed;
  auto optimization = optimize_latent(objective, options);

  Image composed = reconstruct(carrier.image, mask, optimization.best, generator);
  StegoImage stego{quantize_image(composed),
                   StegoProvenance{grille_fingerprint(carrier.padded), config.grille.si, config.mode, config.budget}};
  return HideResult{std::move(stego), std::move(corrupted), std::move(carrier), std::move(mask), overlap,
                    std::move(optimization)};
}

SecretMessage extract(const Image& stego, const GrilleDocument& grille, std::size_t expected_length) {
  const PaddedGrille padded = grille.place(stego.height(), stego.width());
  return extract_message(stego, padded, grille.si, expected_length);
}

std::string StegoSidecar::to_json() const {
  const nlohmann::ordered_json j = {{"format", "cardan-stego-sidecar 1"},
                                    {"mode", mode},
                                    {"iterations", iterations},
                                    {"restarts", restarts},
                                    {"lambda", lambda},
                                    {"seed", seed},
                                    {"model_fingerprint", model_fingerprint},
                                    {"shape", {shape.height, shape.width, shape.channels}},
                                    {"best_total_loss", best_total_loss}};
  return j.dump(2) + "\n";
}

void write_stego(const std::filesystem::path& path, const StegoImage& stego, const StegoSidecar& sidecar) {
  if (!is_lossless_extension(path)) {
    throw FormatError("refusing lossy or unknown output format '" + path.extension().string() +
                      "'; use .png, .bmp, .ppm/.pgm or .tif");
  }
  write_raster(path, stego.image);
  const auto sidecar_path = std::filesystem::path(path.string() + ".json");
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) throw FormatError("cannot write sidecar " + sidecar_path.string());
  out << sidecar.to_json();
}

SecretMessage extract_file(const std::filesystem::path& path, const GrilleDocument& grille,
                           std::size_t expected_length) {
  if (!is_lossless_extension(path)) {
    throw FormatError("stego file '" + path.string() + "' is not in a lossless raster format");
  }
  return extract(read_raster(path), grille, expected_length);
}

}  // namespace cardan
