#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cardan/dataset.hpp"
#include "cardan/models.hpp"

namespace cardan {

struct TrainingConfig {
  int epochs = 25;
  int batch_size = 8;
  double generator_learning_rate = 2e-4;
  double discriminator_learning_rate = 2e-4;
  double beta1 = 0.5;
  ConvArchitecture architecture;
  /// Fixes initialization, data order and the latent draws.
  std::uint64_t seed = 1;
  /// When set, models are written to <dir>/epoch_NNNN/ every
  /// `checkpoint_every` epochs and to <dir>/ when training ends, together
  /// with <dir>/training_log.csv.
  std::optional<std::filesystem::path> checkpoint_dir;
  int checkpoint_every = 5;
};

struct EpochRecord {
  int epoch = 0;
  double discriminator_loss = 0.0;
  double generator_loss = 0.0;
  /// Fraction of real and fake samples the discriminator classified correctly
  /// during the epoch.
  double discriminator_accuracy = 0.0;
};

struct TrainingResult {
  ModelPair models;
  std::vector<EpochRecord> log;
};

/// Minimax training with the non-saturating generator objective. Latent draws
/// are uniform in [-1, 1]^d, matching the box used at completion time.
/// epochs = 0 returns the initialized models. Throws InvalidArgument for an
/// empty dataset or mismatched image shapes, NumericalError (naming the epoch)
/// when a loss turns non-finite.
TrainingResult train_adversarial(const Dataset& dataset, const TrainingConfig& config,
                                 std::ostream* progress = nullptr);

/// Accuracy of D on `dataset` (label real) plus `fakes` generator samples
/// (label fake), thresholding the probability at 0.5.
double discriminator_accuracy(const Generator& generator, const Discriminator& discriminator,
                              const Dataset& dataset, int fakes, std::uint64_t seed);

/// Columns: epoch,discriminator_loss,generator_loss,discriminator_accuracy
std::string training_log_csv(const std::vector<EpochRecord>& log);

}  // namespace cardan
