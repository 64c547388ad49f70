#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cardan/grille.hpp"
#include "cardan/image.hpp"
#include "cardan/message_codec.hpp"
#include "cardan/models.hpp"

namespace cardan {

/// Generator input; every coordinate stays in [-1, 1].
struct LatentVector {
  std::vector<double> values;
  bool operator==(const LatentVector&) const = default;
};

/// Weights of the combined objective
///   contextual + perceptual * log(1 - D(G(z))) + message * message_L1.
/// The contextual weight is fixed at 1.
struct LossWeights {
  double perceptual = 0.1;
  double message = 1.0;
};

struct LossComponents {
  double contextual = 0.0;
  double perceptual = 0.0;
  double message = 0.0;
  double total = 0.0;
};

// --- image-space terms -------------------------------------------------------

/// Sum of |generated - y| over kept (M = 1) pixels and all channels.
double contextual_loss(const Image& generated, const Image& y, const CompletionMask& mask);
/// log(1 - p) with p clamped to [1e-7, 1 - 1e-7].
double perceptual_loss(double probability);
/// Sum of |generated - carrier| over grille-support pixels and all channels.
double message_loss(const Image& generated, const Image& carrier, const PaddedGrille& padded);
/// contextual + weights.perceptual * perceptual + weights.message * message.
double total_loss(double contextual, double perceptual, double message, const LossWeights& weights);

// --- latent-space objective --------------------------------------------------

/// The completion objective for one corrupted carrier. Holds references to
/// `y`, `carrier`, the padded grille and both models: they must outlive it.
class InpaintingObjective {
 public:
  InpaintingObjective(const Image& y, CompletionMask mask, const Image& carrier,
                      const PaddedGrille& padded, LossWeights weights, const Generator& generator,
                      const Discriminator& discriminator);

  int latent_dim() const noexcept { return generator_.latent_dim(); }
  const CompletionMask& mask() const noexcept { return mask_; }
  const LossWeights& weights() const noexcept { return weights_; }
  const Generator& generator() const noexcept { return generator_; }

  LossComponents evaluate(const LatentVector& z) const;

  struct Evaluation {
    LossComponents loss;
    std::vector<double> gradient;  // d(total)/dz
  };
  Evaluation evaluate_with_gradient(const LatentVector& z) const;

  struct ComponentGradients {
    LossComponents loss;
    std::vector<double> contextual;
    std::vector<double> perceptual;
    std::vector<double> message;
    std::vector<double> total;
    /// Smallest |G(z) - target| among the L1 residuals; near zero means z
    /// sits close to a kink of the L1 terms.
    double min_residual = 0.0;
  };
  /// Separate pullbacks per term (three generator backward passes).
  ComponentGradients component_gradients(const LatentVector& z) const;

 private:
  // Image-space gradients of the three terms for generator output `g`.
  void image_gradients(const Image& g, Image* contextual, Image* message, double* min_residual) const;

  const Image& y_;
  CompletionMask mask_;
  const Image& carrier_;
  const PaddedGrille& padded_;
  LossWeights weights_;
  const Generator& generator_;
  const Discriminator& discriminator_;
};

/// Convenience forms that sample G(z) first.
double contextual_loss(const LatentVector& z, const Image& y, const CompletionMask& mask,
                       const Generator& generator);
double perceptual_loss(const LatentVector& z, const Discriminator& discriminator,
                       const Generator& generator);
double message_loss(const LatentVector& z, const ExpandedCarrier& carrier, const Generator& generator);

// --- optimization ------------------------------------------------------------

struct OptimizerOptions {
  int budget = 1000;
  int restarts = 1;
  double step_size = 0.01;
  std::uint64_t seed = 0;
  /// Per-restart iteration numbers at which the best iterate so far is
  /// reported (combined over restarts). A run with budget b reports exactly
  /// what a separate run with budget b would return.
  std::vector<int> checkpoints;
};

struct IterationRecord {
  int iteration = 0;  // 1-based, counted across restarts
  LossComponents loss;
  double best_total = 0.0;
};

struct OptimizationTrace {
  std::vector<IterationRecord> records;
  int budget = 0;
  int restarts = 0;

  bool best_is_non_increasing() const noexcept;
  /// Columns: iteration,L_contextual,L_perceptual,L_message,total,best_total
  std::string to_csv() const;
};

struct Checkpoint {
  int iteration = 0;
  LatentVector best;
  LossComponents best_loss;
};

struct OptimizationResult {
  LatentVector best;
  LossComponents best_loss;
  OptimizationTrace trace;
  std::vector<Checkpoint> checkpoints;
};

/// Adam descent on z from seeded uniform starts in [-1, 1]^d, projecting back
/// into the box after every step. Iteration i evaluates the current z, then
/// steps. Returns the lowest-total iterate seen over all restarts.
/// Throws InvalidArgument for budget < 1 or restarts < 1, NumericalError
/// (naming the iteration) on a non-finite loss or gradient.
OptimizationResult optimize_latent(const InpaintingObjective& objective, const OptimizerOptions& options);

// --- compositing -------------------------------------------------------------

/// M * y + (1 - M) * clip(generated). Kept pixels are copied bit-exactly.
Image reconstruct(const Image& y, const CompletionMask& mask, const Image& generated);
Image reconstruct(const Image& y, const CompletionMask& mask, const LatentVector& z_hat,
                  const Generator& generator);

/// soft: zero exactly on the region. hard: zero on the region except the
/// grille support, which stays 1 so message pixels bypass the generator.
/// Throws ShapeError when the region is outside the image.
CompletionMask build_completion_mask(const Rect& region, const PaddedGrille& padded, CompletionMode mode);

}  // namespace cardan
