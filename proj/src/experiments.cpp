#include "cardan/experiments.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "cardan/error.hpp"
#include "cardan/rng.hpp"

namespace cardan {

namespace {

Bytes random_key(Rng& rng, std::size_t length = 16) {
  Bytes key(length);
  for (auto& b : key) b = static_cast<std::uint8_t>(rng.next_u64() >> 56);
  return key;
}

SecretMessage random_message(Rng& rng, std::size_t bits) {
  std::vector<std::uint8_t> out(bits);
  for (auto& b : out) b = rng.bit() ? 1 : 0;
  return SecretMessage(std::move(out));
}

struct Accumulator {
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double message_loss = 0.0;
  int count = 0;

  void add(double ber, double loss) {
    sum += ber;
    min = std::min(min, ber);
    max = std::max(max, ber);
    message_loss += loss;
    ++count;
  }
};

void add_ber_row(CsvTable& table, std::string_view mode, int si, int budget, const Accumulator& acc) {
  table.add_row({std::string(mode), std::to_string(si), std::to_string(budget), std::to_string(acc.count),
                 format_fixed(acc.sum / acc.count), format_fixed(acc.min), format_fixed(acc.max),
                 format_fixed(acc.message_loss / acc.count)});
}

// Prepared carrier plus the objective over it.
struct Trial {
  CorruptedCover cover;
  ExpandedCarrier carrier;
  CompletionMask mask;
};

Trial prepare(const Image& image, const Rect& region, const PaddedGrille& padded, const SecretMessage& message,
              int si, CompletionMode mode) {
  auto cover = corrupt(ImageRecord{image, "cover"}, region);
  auto carrier = expand_message(message, cover.image.pixels, padded, si);
  auto mask = build_completion_mask(region, carrier.padded, mode);
  return Trial{std::move(cover), std::move(carrier), std::move(mask)};
}

}  // namespace

ExperimentResult eval_ber(const Generator& generator, const Discriminator& discriminator, const Dataset& covers,
                          const BerExperimentConfig& config) {
  if (config.trials < 1) throw InvalidArgument("eval_ber needs at least one trial");
  if (covers.empty()) throw InvalidArgument("eval_ber needs at least one cover image");
  if (config.stability_indices.empty() || config.budgets.empty()) {
    throw InvalidArgument("eval_ber needs at least one si and one budget");
  }
  for (const int si : config.stability_indices) {
    if (si < 0 || si > 7) throw InvalidArgument("si must lie in 0..7");
  }
  for (const int b : config.budgets) {
    if (b < 1) throw InvalidArgument("budgets must be positive");
  }
  const ImageShape shape = generator.output_shape();
  for (const auto& c : covers) {
    if (c.pixels.shape() != shape) throw ShapeError("cover " + c.source + " does not match the model shape");
  }
  const Rect region = config.region.value_or(central_region(shape.height, shape.width));
  const int grille_side = config.grille_size.value_or(std::min(region.height, region.width));

  std::vector<int> budgets = config.budgets;
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  std::vector<int> sis = config.stability_indices;
  std::sort(sis.begin(), sis.end());
  sis.erase(std::unique(sis.begin(), sis.end()), sis.end());

  ExperimentResult result;
  result.seed = config.seed;
  result.model_fingerprint = model_fingerprint(generator, discriminator);
  std::map<std::pair<int, int>, Accumulator> soft;
  std::map<int, Accumulator> hard;

  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    Rng rng(trial_seed);
    const Image& image = covers[static_cast<std::size_t>(t) % covers.size()].pixels;
    const auto grille = derive_grille(random_key(rng), grille_side, grille_side, config.density);
    const PaddedGrille padded = zero_pad(grille, shape.height, shape.width);

    for (const int si : sis) {
      Rng message_rng(derive_seed(trial_seed, 100 + static_cast<std::uint64_t>(si)));
      const auto message = random_message(message_rng, capacity(padded, shape.channels, si));
      const std::uint64_t run_seed = derive_seed(trial_seed, 200 + static_cast<std::uint64_t>(si));

      {
        const auto trial = prepare(image, region, padded, message, si, CompletionMode::soft);
        const InpaintingObjective objective(trial.carrier.image, trial.mask, trial.carrier.image,
                                            trial.carrier.padded, config.weights, generator, discriminator);
        OptimizerOptions options;
        options.budget = budgets.back();
        options.restarts = config.restarts;
        options.seed = run_seed;
        options.checkpoints = budgets;
        const auto run = optimize_latent(objective, options);
        ++result.optimization_runs;
        result.non_monotone_runs += !run.trace.best_is_non_increasing();
        for (const auto& cp : run.checkpoints) {
          const Image stego =
              quantize_image(reconstruct(trial.carrier.image, trial.mask, cp.best, generator));
          const auto received = extract_message(stego, trial.carrier.padded, si, message.size());
          soft[{si, cp.iteration}].add(bit_error_rate(message, received), cp.best_loss.message);
        }
      }
      if (config.hard_mode_rows) {
        const auto trial = prepare(image, region, padded, message, si, CompletionMode::hard);
        const InpaintingObjective objective(trial.carrier.image, trial.mask, trial.carrier.image,
                                            trial.carrier.padded, config.weights, generator, discriminator);
        OptimizerOptions options;
        options.budget = budgets.front();
        options.restarts = config.restarts;
        options.seed = run_seed;
        const auto run = optimize_latent(objective, options);
        ++result.optimization_runs;
        result.non_monotone_runs += !run.trace.best_is_non_increasing();
        const Image stego = quantize_image(reconstruct(trial.carrier.image, trial.mask, run.best, generator));
        const auto received = extract_message(stego, trial.carrier.padded, si, message.size());
        hard[si].add(bit_error_rate(message, received), run.best_loss.message);
      }
    }
  }

  result.table.columns = {"mode", "si", "budget", "trials", "mean_ber", "min_ber", "max_ber", "mean_message_loss"};
  for (const int si : sis) {
    for (const int b : budgets) add_ber_row(result.table, "soft", si, b, soft.at({si, b}));
  }
  if (config.hard_mode_rows) {
    for (const int si : sis) add_ber_row(result.table, "hard", si, budgets.front(), hard.at(si));
  }
  return result;
}

ExperimentResult sweep_grille_size(const Generator& generator, const Discriminator& discriminator,
                                   const Image& cover, const std::vector<int>& sizes,
                                   const GrilleSweepConfig& config) {
  if (sizes.empty()) throw InvalidArgument("grille sweep needs at least one size");
  const ImageShape shape = generator.output_shape();
  if (cover.shape() != shape) throw ShapeError("cover does not match the model shape");
  for (const int s : sizes) {
    if (s < 1) throw InvalidArgument("grille size must be positive, got " + std::to_string(s));
    if (s > shape.height || s > shape.width) {
      throw ShapeError("grille size " + std::to_string(s) + " exceeds the image");
    }
  }
  const Rect region = config.region.value_or(central_region(shape.height, shape.width));

  ExperimentResult result;
  result.seed = config.seed;
  result.model_fingerprint = model_fingerprint(generator, discriminator);
  result.table.columns = {"size", "popcount", "capacity_bits", "overlap_cells", "message_loss", "contextual_loss", "ber"};

  Rng key_rng(derive_seed(config.seed, 1));
  const Bytes key = random_key(key_rng);
  for (const int size : sizes) {
    HideConfig hide_config;
    hide_config.grille = GrilleDocument::from_key(key, size, size, config.density, config.si);
    hide_config.mode = CompletionMode::soft;
    hide_config.weights = config.weights;
    hide_config.budget = config.budget;
    hide_config.restarts = config.restarts;
    hide_config.seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(size));
    hide_config.region = region;

    const PaddedGrille padded = hide_config.grille.place(shape.height, shape.width);
    Rng message_rng(derive_seed(config.seed, 2000 + static_cast<std::uint64_t>(size)));
    const auto message = random_message(message_rng, capacity(padded, shape.channels, config.si));

    const auto hidden = hide(cover, message, hide_config, generator, discriminator);
    ++result.optimization_runs;
    result.non_monotone_runs += !hidden.optimization.trace.best_is_non_increasing();
    const auto received = extract_message(hidden.stego, hidden.carrier.padded, config.si, message.size());

    result.table.add_row({std::to_string(size), std::to_string(padded.popcount()), std::to_string(message.size()),
                          std::to_string(hidden.overlap.overlapping_cells),
                          format_fixed(hidden.optimization.best_loss.message),
                          format_fixed(hidden.optimization.best_loss.contextual),
                          format_fixed(bit_error_rate(message, received))});
    result.artifacts.push_back(NamedImage{"stego_size_" + std::to_string(size), hidden.stego.image});
  }
  return result;
}

std::vector<int> snapshot_iterations(int budget, int count) {
  if (budget < 1 || count < 1) throw InvalidArgument("snapshot budget and count must be positive");
  std::vector<int> out;
  for (int k = 1; k <= count; ++k) {
    const int it = static_cast<int>((static_cast<long long>(k) * budget + count - 1) / count);
    if (it >= 1 && (out.empty() || out.back() != it)) out.push_back(it);
  }
  return out;
}

ZeroMessageResult run_zero_message(const Generator& generator, const Discriminator& discriminator,
                                   const Image& cover, int budget, const ZeroMessageConfig& config) {
  if (budget < 1) throw InvalidArgument("iteration budget must be at least 1");
  const ImageShape shape = generator.output_shape();
  if (cover.shape() != shape) throw ShapeError("cover does not match the model shape");
  const Rect region = config.region.value_or(central_region(shape.height, shape.width));
  const int side = config.grille_size.value_or(std::min(region.height, region.width));

  Rng key_rng(derive_seed(config.seed, 1));
  const auto grille = derive_grille(random_key(key_rng), side, side, config.density);
  const PaddedGrille padded = zero_pad(grille, shape.height, shape.width);
  const auto trial = prepare(cover, region, padded, SecretMessage{}, config.si, CompletionMode::soft);
  const InpaintingObjective objective(trial.carrier.image, trial.mask, trial.carrier.image, trial.carrier.padded,
                                      config.weights, generator, discriminator);
  OptimizerOptions options;
  options.budget = budget;
  options.restarts = config.restarts;
  options.seed = derive_seed(config.seed, 2);
  options.checkpoints = snapshot_iterations(budget, config.snapshots);
  auto run = optimize_latent(objective, options);

  ZeroMessageResult result;
  result.table.columns = {"iteration", "best_total", "best_message_loss"};
  for (const auto& cp : run.checkpoints) {
    result.snapshots.push_back(Snapshot{
        cp.iteration, quantize_image(reconstruct(trial.carrier.image, trial.mask, cp.best, generator)), cp.best_loss});
    result.table.add_row({std::to_string(cp.iteration), format_fixed(cp.best_loss.total),
                          format_fixed(cp.best_loss.message)});
  }
  result.stego = StegoImage{quantize_image(reconstruct(trial.carrier.image, trial.mask, run.best, generator)),
                            StegoProvenance{grille_fingerprint(padded), config.si, CompletionMode::soft, budget}};
  result.trace = std::move(run.trace);
  return result;
}

}  // namespace cardan
