#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cardan/csv.hpp"
#include "cardan/dataset.hpp"
#include "cardan/inpainting.hpp"
#include "cardan/models.hpp"
#include "cardan/pipeline.hpp"

namespace cardan {

struct NamedImage {
  std::string name;
  Image image;
};

/// Table plus artifacts of one experiment. Every row is regenerable from
/// `seed`, the experiment config and `model_fingerprint`.
struct ExperimentResult {
  CsvTable table;
  std::vector<NamedImage> artifacts;
  std::uint64_t seed = 0;
  std::string model_fingerprint;
  /// Optimization runs performed and how many broke best-loss monotonicity.
  std::size_t optimization_runs = 0;
  std::size_t non_monotone_runs = 0;
};

struct BerExperimentConfig {
  std::vector<int> stability_indices{4, 5, 6, 7};
  std::vector<int> budgets{60, 200, 600};
  int trials = 20;
  std::uint64_t seed = 0;
  double density = kDefaultGrilleDensity;
  /// Square grille side; defaults to the region side.
  std::optional<int> grille_size;
  std::optional<Rect> region;
  LossWeights weights;
  int restarts = 1;
  /// Adds one hard-mode row per si at the smallest budget.
  bool hard_mode_rows = true;
};

/// Soft-mode bit error rate per (si, budget). Trial t uses cover
/// covers[t % size], a random 16-byte grille key and a random full-capacity
/// message, all drawn from derive_seed(seed, t). One optimization per
/// (trial, si) runs to the largest budget; smaller budgets read its
/// checkpoints, which equal separate runs with those budgets.
///
/// Columns: mode,si,budget,trials,mean_ber,min_ber,max_ber,mean_message_loss
ExperimentResult eval_ber(const Generator& generator, const Discriminator& discriminator,
                          const Dataset& covers, const BerExperimentConfig& config);

struct GrilleSweepConfig {
  std::optional<Rect> region;
  std::uint64_t seed = 0;
  double density = kDefaultGrilleDensity;
  int si = 7;
  int budget = 200;
  int restarts = 1;
  LossWeights weights;
};

/// Soft-mode hide on one cover for every centered square grille size, sharing
/// one key. Artifacts: "stego_size_<n>".
///
/// Columns: size,popcount,capacity_bits,overlap_cells,message_loss,contextual_loss,ber
ExperimentResult sweep_grille_size(const Generator& generator, const Discriminator& discriminator,
                                   const Image& cover, const std::vector<int>& sizes,
                                   const GrilleSweepConfig& config);

struct ZeroMessageConfig {
  std::uint64_t seed = 0;
  double density = kDefaultGrilleDensity;
  std::optional<int> grille_size;
  std::optional<Rect> region;
  int si = 7;
  int restarts = 1;
  LossWeights weights;
  int snapshots = 10;
};

struct Snapshot {
  int iteration = 0;
  Image image;
  LossComponents best_loss;
};

struct ZeroMessageResult {
  StegoImage stego;
  OptimizationTrace trace;
  std::vector<Snapshot> snapshots;
  /// Columns: iteration,best_total,best_message_loss
  CsvTable table;
};

/// Iterations ceil(k * budget / count) for k = 1..count, duplicates removed.
std::vector<int> snapshot_iterations(int budget, int count);

/// Hides the all-zero message (every grille slot written) in soft mode and
/// records reconstructions of the best iterate at evenly spaced iterations.
ZeroMessageResult run_zero_message(const Generator& generator, const Discriminator& discriminator,
                                   const Image& cover, int budget, const ZeroMessageConfig& config);

}  // namespace cardan
