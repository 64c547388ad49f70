#include "cardan/inpainting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cardan/error.hpp"
#include "cardan/rng.hpp"

namespace cardan {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape()) throw ShapeError(std::string(what) + ": image shapes differ");
}

void require_mask_shape(const Image& image, const BinaryMask& mask, const char* what) {
  if (image.height() != mask.height() || image.width() != mask.width()) {
    throw ShapeError(std::string(what) + ": mask does not match the image");
  }
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double perceptual_from_pass(const DiscriminatorPass& pass) { return perceptual_loss(pass.probability()); }

// d/dlogit of log(1 - clamp(sigmoid(logit))).
double perceptual_logit_gradient(const DiscriminatorPass& pass) {
  return pass.clamped() ? 0.0 : -pass.probability();
}

void add_scaled(std::span<double> into, std::span<const double> from, double factor) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += factor * from[i];
}

}  // namespace

double contextual_loss(const Image& generated, const Image& y, const CompletionMask& mask) {
  require_same_shape(generated, y, "contextual loss");
  require_mask_shape(y, mask.cells, "contextual loss");
  double sum = 0.0;
  for (int r = 0; r < y.height(); ++r) {
    for (int c = 0; c < y.width(); ++c) {
      if (!mask.cells.at(r, c)) continue;
      for (int ch = 0; ch < y.channels(); ++ch) sum += std::abs(generated.at(r, c, ch) - y.at(r, c, ch));
    }
  }
  return sum;
}

double perceptual_loss(double probability) {
  const double p = std::clamp(probability, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return std::log1p(-p);
}

double message_loss(const Image& generated, const Image& carrier, const PaddedGrille& padded) {
  require_same_shape(generated, carrier, "message loss");
  require_mask_shape(carrier, padded.cells(), "message loss");
  double sum = 0.0;
  for (const auto& [r, c] : padded.support()) {
    for (int ch = 0; ch < carrier.channels(); ++ch) sum += std::abs(generated.at(r, c, ch) - carrier.at(r, c, ch));
  }
  return sum;
}

double total_loss(double contextual, double perceptual, double message, const LossWeights& weights) {
  return contextual + weights.perceptual * perceptual + weights.message * message;
}

InpaintingObjective::InpaintingObjective(const Image& y, CompletionMask mask, const Image& carrier,
                                         const PaddedGrille& padded, LossWeights weights,
                                         const Generator& generator, const Discriminator& discriminator)
    : y_(y),
      mask_(std::move(mask)),
      carrier_(carrier),
      padded_(padded),
      weights_(weights),
      generator_(generator),
      discriminator_(discriminator) {
  if (!(weights.perceptual >= 0.0) || !std::isfinite(weights.perceptual) || !(weights.message >= 0.0) ||
      !std::isfinite(weights.message)) {
    throw InvalidArgument("loss weights must be finite and non-negative");
  }
  require_same_shape(y, carrier, "inpainting objective");
  require_mask_shape(y, mask_.cells, "inpainting objective");
  require_mask_shape(y, padded.cells(), "inpainting objective");
  if (generator.output_shape() != y.shape()) {
    throw ShapeError("generator output shape does not match the corrupted image");
  }
  if (discriminator.input_shape() != y.shape()) {
    throw ShapeError("discriminator input shape does not match the corrupted image");
  }
}

void InpaintingObjective::image_gradients(const Image& g, Image* contextual, Image* message,
                                          double* min_residual) const {
  double smallest = std::numeric_limits<double>::infinity();
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      if (!mask_.cells.at(r, c)) continue;
      for (int ch = 0; ch < g.channels(); ++ch) {
        const double residual = g.at(r, c, ch) - y_.at(r, c, ch);
        contextual->at(r, c, ch) += sign(residual);
        smallest = std::min(smallest, std::abs(residual));
      }
    }
  }
  for (const auto& [r, c] : padded_.support()) {
    for (int ch = 0; ch < g.channels(); ++ch) {
      const double residual = g.at(r, c, ch) - carrier_.at(r, c, ch);
      message->at(r, c, ch) += sign(residual);
      smallest = std::min(smallest, std::abs(residual));
    }
  }
  if (min_residual != nullptr) *min_residual = smallest;
}

LossComponents InpaintingObjective::evaluate(const LatentVector& z) const {
  const auto pass = generator_.forward(z.values);
  const Image& g = pass->output();
  LossComponents loss;
  loss.contextual = contextual_loss(g, y_, mask_);
  loss.perceptual = perceptual_from_pass(*discriminator_.forward(g));
  loss.message = message_loss(g, carrier_, padded_);
  loss.total = total_loss(loss.contextual, loss.perceptual, loss.message, weights_);
  return loss;
}

InpaintingObjective::Evaluation InpaintingObjective::evaluate_with_gradient(const LatentVector& z) const {
  const auto pass = generator_.forward(z.values);
  const Image& g = pass->output();
  const auto d_pass = discriminator_.forward(g);

  Evaluation result;
  result.loss.contextual = contextual_loss(g, y_, mask_);
  result.loss.perceptual = perceptual_from_pass(*d_pass);
  result.loss.message = message_loss(g, carrier_, padded_);
  result.loss.total = total_loss(result.loss.contextual, result.loss.perceptual, result.loss.message, weights_);

  Image grad_contextual(g.shape());
  Image grad_message(g.shape());
  image_gradients(g, &grad_contextual, &grad_message, nullptr);

  Image grad_image = std::move(grad_contextual);
  add_scaled(grad_image.values(), grad_message.values(), weights_.message);
  if (weights_.perceptual != 0.0) {
    const Image grad_perceptual = d_pass->pullback(perceptual_logit_gradient(*d_pass));
    add_scaled(grad_image.values(), grad_perceptual.values(), weights_.perceptual);
  }
  result.gradient = pass->pullback(grad_image);
  return result;
}

InpaintingObjective::ComponentGradients InpaintingObjective::component_gradients(const LatentVector& z) const {
  const auto pass = generator_.forward(z.values);
  const Image& g = pass->output();
  const auto d_pass = discriminator_.forward(g);

  ComponentGradients result;
  result.loss.contextual = contextual_loss(g, y_, mask_);
  result.loss.perceptual = perceptual_from_pass(*d_pass);
  result.loss.message = message_loss(g, carrier_, padded_);
  result.loss.total = total_loss(result.loss.contextual, result.loss.perceptual, result.loss.message, weights_);

  Image grad_contextual(g.shape());
  Image grad_message(g.shape());
  image_gradients(g, &grad_contextual, &grad_message, &result.min_residual);
  result.contextual = pass->pullback(grad_contextual);
  result.message = pass->pullback(grad_message);
  result.perceptual = pass->pullback(d_pass->pullback(perceptual_logit_gradient(*d_pass)));

  result.total = result.contextual;
  add_scaled(result.total, result.perceptual, weights_.perceptual);
  add_scaled(result.total, result.message, weights_.message);
  return result;
}

double contextual_loss(const LatentVector& z, const Image& y, const CompletionMask& mask, const Generator& generator) {
  return contextual_loss(generator.sample(z.values), y, mask);
}

double perceptual_loss(const LatentVector& z, const Discriminator& discriminator, const Generator& generator) {
  return perceptual_loss(discriminator.discriminate(generator.sample(z.values)));
}

double message_loss(const LatentVector& z, const ExpandedCarrier& carrier, const Generator& generator) {
  return message_loss(generator.sample(z.values), carrier.image, carrier.padded);
}

bool OptimizationTrace::best_is_non_increasing() const noexcept {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].best_total > records[i - 1].best_total) return false;
  }
  return true;
}

std::string OptimizationTrace::to_csv() const {
  std::string out = "iteration,L_contextual,L_perceptual,L_message,total,best_total\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.iteration, r.loss.contextual,
                  r.loss.perceptual, r.loss.message, r.loss.total, r.best_total);
    out += line;
  }
  return out;
}

OptimizationResult optimize_latent(const InpaintingObjective& objective, const OptimizerOptions& options) {
  if (options.budget < 1) throw InvalidArgument("iteration budget must be at least 1");
  if (options.restarts < 1) throw InvalidArgument("restart count must be at least 1");
  if (!(options.step_size > 0.0)) throw InvalidArgument("step size must be positive");
  for (const int c : options.checkpoints) {
    if (c < 1 || c > options.budget) {
      throw InvalidArgument("checkpoint " + std::to_string(c) + " is outside 1.." + std::to_string(options.budget));
    }
  }

  const auto dim = static_cast<std::size_t>(objective.latent_dim());
  OptimizationResult result;
  result.trace.budget = options.budget;
  result.trace.restarts = options.restarts;
  result.trace.records.reserve(static_cast<std::size_t>(options.budget) * static_cast<std::size_t>(options.restarts));
  result.best_loss.total = std::numeric_limits<double>::infinity();
  for (const int c : options.checkpoints) {
    Checkpoint cp;
    cp.iteration = c;
    cp.best_loss.total = std::numeric_limits<double>::infinity();
    result.checkpoints.push_back(std::move(cp));
  }

  int global_iteration = 0;
  for (int restart = 0; restart < options.restarts; ++restart) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(restart)));
    LatentVector z{std::vector<double>(dim)};
    for (auto& v : z.values) v = rng.uniform(-1.0, 1.0);
    nn::Adam adam(dim, options.step_size);

    LatentVector restart_best;
    LossComponents restart_best_loss;
    restart_best_loss.total = std::numeric_limits<double>::infinity();

    for (int i = 1; i <= options.budget; ++i) {
      ++global_iteration;
      auto eval = objective.evaluate_with_gradient(z);
      if (!std::isfinite(eval.loss.total) || !all_finite(eval.gradient)) {
        throw NumericalError("non-finite loss or gradient at iteration " + std::to_string(global_iteration) +
                             " (restart " + std::to_string(restart + 1) + ", step " + std::to_string(i) + ")");
      }
      if (eval.loss.total < restart_best_loss.total) {
        restart_best_loss = eval.loss;
        restart_best = z;
      }
      if (eval.loss.total < result.best_loss.total) {
        result.best_loss = eval.loss;
        result.best = z;
      }
      result.trace.records.push_back(IterationRecord{global_iteration, eval.loss, result.best_loss.total});
      for (auto& cp : result.checkpoints) {
        if (cp.iteration == i && restart_best_loss.total < cp.best_loss.total) {
          cp.best_loss = restart_best_loss;
          cp.best = restart_best;
        }
      }
      if (i == options.budget) break;
      adam.step(z.values, eval.gradient);
      for (auto& v : z.values) v = std::clamp(v, -1.0, 1.0);
    }
  }
  return result;
}

Image reconstruct(const Image& y, const CompletionMask& mask, const Image& generated) {
  require_same_shape(y, generated, "reconstruct");
  require_mask_shape(y, mask.cells, "reconstruct");
  Image out(y.shape());
  for (int r = 0; r < y.height(); ++r) {
    for (int c = 0; c < y.width(); ++c) {
      const bool keep = mask.cells.at(r, c) != 0;
      for (int ch = 0; ch < y.channels(); ++ch) {
        out.at(r, c, ch) = keep ? y.at(r, c, ch) : std::clamp(generated.at(r, c, ch), -1.0, 1.0);
      }
    }
  }
  return out;
}

Image reconstruct(const Image& y, const CompletionMask& mask, const LatentVector& z_hat, const Generator& generator) {
  return reconstruct(y, mask, generator.sample(z_hat.values));
}

CompletionMask build_completion_mask(const Rect& region, const PaddedGrille& padded, CompletionMode mode) {
  if (!region.fits_in(padded.height(), padded.width())) {
    throw ShapeError("completion region is outside the " + std::to_string(padded.height()) + "x" +
                     std::to_string(padded.width()) + " image");
  }
  CompletionMask mask{BinaryMask(padded.height(), padded.width(), 1)};
  for (int r = region.row; r < region.row + region.height; ++r) {
    for (int c = region.col; c < region.col + region.width; ++c) {
      const bool keep = mode == CompletionMode::hard && padded.on_support(r, c);
      mask.cells.set(r, c, keep);
    }
  }
  return mask;
}

}  // namespace cardan
