#include <doctest.h>

#include <cmath>
#include <limits>

#include "cardan/error.hpp"
#include "cardan/inpainting.hpp"
#include "support.hpp"

using namespace cardan;

namespace {

// G(z) = tanh(b): a constant generator with a chosen output.
OracleGenerator constant_generator(const Image& target, int latent_dim = 1) {
  std::vector<double> bias;
  for (const double v : target.values()) bias.push_back(std::atanh(v));
  return OracleGenerator(target.shape(), latent_dim, std::vector<double>(target.values().size() * latent_dim, 0.0),
                         bias);
}

CompletionMask mask_of(int h, int w, std::uint8_t fill) { return CompletionMask{BinaryMask(h, w, fill)}; }

PaddedGrille single_pixel_grille(int h, int w, int row, int col) {
  BinaryMask cells(1, 1, 1);
  return zero_pad(load_grille(cells), h, w, Offset{row, col});
}

LatentVector random_z(Rng& rng, int d) {
  LatentVector z{std::vector<double>(static_cast<std::size_t>(d))};
  for (auto& v : z.values) v = rng.uniform(-1.0, 1.0);
  return z;
}

double grid_minimum(const InpaintingObjective& objective) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const LatentVector z{{-1.0 + 0.01 * i, -1.0 + 0.01 * j}};
      best = std::min(best, objective.evaluate(z).total);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("contextual loss hand examples") {
  Image y(ImageShape{2, 2, 1}, 0.1);
  Image g = y;
  CHECK(contextual_loss(g, y, mask_of(2, 2, 1)) == 0.0);
  g.at(0, 0, 0) = 0.4;
  g.at(1, 1, 0) = -0.9;
  CompletionMask m = mask_of(2, 2, 0);
  CHECK(contextual_loss(g, y, m) == 0.0);
  m.cells.set(0, 0, true);
  CHECK(contextual_loss(g, y, m) == doctest::Approx(0.3));

  const auto gen = constant_generator(g);
  CHECK(contextual_loss(LatentVector{{0.5}}, y, m, gen) == doctest::Approx(0.3));
  CHECK_THROWS_AS(contextual_loss(g, y, mask_of(3, 3, 1)), ShapeError);
}

TEST_CASE("perceptual loss values") {
  CHECK(perceptual_loss(0.5) == doctest::Approx(-0.693147).epsilon(1e-6));
  CHECK(perceptual_loss(1.0) == doctest::Approx(std::log(kProbabilityEpsilon)));
  CHECK(perceptual_loss(0.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::isfinite(perceptual_loss(1.0)));

  const ImageShape shape{2, 2, 1};
  const auto gen = constant_generator(Image(shape, 0.2));
  OracleDiscriminator d(shape, std::vector<double>(4, 0.0), 0.0);
  CHECK(perceptual_loss(LatentVector{{0.0}}, d, gen) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("message loss hand examples") {
  const ImageShape shape{3, 3, 1};
  Image carrier(shape, 0.0);
  carrier.at(1, 2, 0) = 0.5;
  Image g = carrier;
  const auto padded = single_pixel_grille(3, 3, 1, 2);
  CHECK(message_loss(g, carrier, padded) == 0.0);
  g.at(1, 2, 0) = 0.4;
  g.at(0, 0, 0) = 0.9;  // off support, ignored
  CHECK(message_loss(g, carrier, padded) == doctest::Approx(0.1));
  const auto empty = zero_pad(load_grille(BinaryMask(1, 1)), 3, 3);
  CHECK(message_loss(g, carrier, empty) == 0.0);

  const auto gen = constant_generator(g);
  const ExpandedCarrier ec{carrier, padded, 7};
  CHECK(message_loss(LatentVector{{0.0}}, ec, gen) == doctest::Approx(0.1));
}

TEST_CASE("total loss combination") {
  CHECK(total_loss(0.4, -0.6931, 0.2, LossWeights{0.1, 1.0}) == doctest::Approx(0.53069).epsilon(1e-12));
  CHECK(total_loss(0.4, -0.6931, 0.2, LossWeights{0.0, 1.0}) == doctest::Approx(0.6));

  // lambda = 0 with a perfect fit on kept and support pixels.
  const ImageShape shape{4, 4, 1};
  Rng rng(2);
  Image target = testing::random_image(rng, shape);
  for (auto& v : target.values()) v *= 0.9;
  const auto gen = constant_generator(target);
  const auto padded = single_pixel_grille(4, 4, 2, 2);
  OracleDiscriminator d(shape, std::vector<double>(16, 0.3), 0.1);
  CompletionMask m = mask_of(4, 4, 1);
  m.cells.set(2, 2, false);
  const InpaintingObjective perfect(target, m, target, padded, LossWeights{0.0, 1.0}, gen, d);
  CHECK(perfect.evaluate(LatentVector{{0.3}}).total < 1e-12);  // tanh(atanh(v)) round-off

  // Empty grille and a fully kept image: contextual + lambda * perceptual.
  const auto empty = zero_pad(load_grille(BinaryMask(1, 1)), 4, 4);
  const Image y(shape, 0.0);
  const InpaintingObjective plain(y, mask_of(4, 4, 1), y, empty, LossWeights{0.1, 1.0}, gen, d);
  const auto l = plain.evaluate(LatentVector{{0.0}});
  CHECK(l.message == 0.0);
  CHECK(l.total == doctest::Approx(contextual_loss(target, y, mask_of(4, 4, 1)) +
                                   0.1 * perceptual_loss(d.discriminate(target))));
}

TEST_CASE("objective validates its inputs") {
  const ImageShape shape{4, 4, 1};
  const auto pair = make_oracle(2, shape, 1);
  const Image y(shape);
  const auto padded = single_pixel_grille(4, 4, 0, 0);
  CHECK_THROWS_AS(InpaintingObjective(y, mask_of(4, 4, 1), y, padded, LossWeights{-0.1, 1.0}, *pair.generator,
                                      *pair.discriminator),
                  InvalidArgument);
  CHECK_THROWS_AS(InpaintingObjective(y, mask_of(4, 4, 1), y, padded,
                                      LossWeights{std::numeric_limits<double>::infinity(), 1.0}, *pair.generator,
                                      *pair.discriminator),
                  InvalidArgument);
  CHECK_THROWS_AS(InpaintingObjective(y, mask_of(3, 4, 1), y, padded, LossWeights{}, *pair.generator,
                                      *pair.discriminator),
                  ShapeError);
  const Image other(ImageShape{4, 4, 3});
  CHECK_THROWS_AS(InpaintingObjective(other, CompletionMask{BinaryMask(4, 4, 1)}, other, padded, LossWeights{},
                                      *pair.generator, *pair.discriminator),
                  ShapeError);
}

TEST_CASE("analytic gradients of every term match central differences") {
  const ImageShape shape{6, 6, 3};
  Rng rng(31);
  int checked = 0;
  int rejected = 0;
  while (checked < 100) {
    const auto pair = make_oracle(4, shape, rng.next_u64());
    const Image y = testing::random_image(rng, shape);
    const auto padded = testing::random_padded(rng, 6, 6);
    const auto carrier = expand_message(testing::random_message(rng, capacity(padded, 3, 6) / 2), y, padded, 6);
    CompletionMask m{testing::random_mask(rng, 6, 6)};
    const InpaintingObjective obj(y, m, carrier.image, padded, LossWeights{0.1 + rng.uniform(), 1.0},
                                  *pair.generator, *pair.discriminator);
    const auto z = random_z(rng, 4);
    const auto grads = obj.component_gradients(z);
    if (grads.min_residual < 1e-3) {
      ++rejected;
      continue;
    }
    const double h = 1e-5;
    for (std::size_t i = 0; i < z.values.size(); ++i) {
      LatentVector zp = z, zm = z;
      zp.values[i] += h;
      zm.values[i] -= h;
      const auto lp = obj.evaluate(zp);
      const auto lm = obj.evaluate(zm);
      const auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); };
      CHECK(rel(grads.contextual[i], (lp.contextual - lm.contextual) / (2 * h)) < 1e-4);
      CHECK(rel(grads.perceptual[i], (lp.perceptual - lm.perceptual) / (2 * h)) < 1e-4);
      CHECK(rel(grads.message[i], (lp.message - lm.message) / (2 * h)) < 1e-4);
      CHECK(rel(grads.total[i], (lp.total - lm.total) / (2 * h)) < 1e-4);
    }
    const auto single = obj.evaluate_with_gradient(z);
    for (std::size_t i = 0; i < z.values.size(); ++i) CHECK(single.gradient[i] == doctest::Approx(grads.total[i]));
    ++checked;
  }
  CHECK(rejected < 100);
}

TEST_CASE("optimizer matches the grid-search minimum on message-only problems") {
  Rng rng(77);
  for (int problem = 0; problem < 5; ++problem) {
    const ImageShape shape{4, 4, 3};
    const auto pair = make_oracle(2, shape, 1000 + problem);
    const Image y = testing::random_image(rng, shape);
    const auto padded = single_pixel_grille(4, 4, 1, 2);
    const auto carrier = expand_message(testing::random_message(rng, 3), y, padded, 7);
    const InpaintingObjective obj(carrier.image, mask_of(4, 4, 0), carrier.image, padded, LossWeights{0.0, 1.0},
                                  *pair.generator, *pair.discriminator);
    OptimizerOptions options;
    options.budget = 1000;
    options.restarts = 5;
    options.seed = static_cast<std::uint64_t>(problem);
    const auto result = optimize_latent(obj, options);
    const double grid = grid_minimum(obj);
    CHECK(result.best_loss.total <= grid + 0.05 * std::abs(grid));
    for (const double v : result.best.values) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("degenerate contextual-only problem matches the grid search") {
  Rng rng(78);
  for (int problem = 0; problem < 3; ++problem) {
    const ImageShape shape{4, 4, 1};
    const auto pair = make_oracle(2, shape, 2000 + problem);
    const Image y = testing::random_image(rng, shape);
    const auto empty = zero_pad(load_grille(BinaryMask(1, 1)), 4, 4);
    const InpaintingObjective obj(y, mask_of(4, 4, 1), y, empty, LossWeights{0.0, 1.0}, *pair.generator,
                                  *pair.discriminator);
    OptimizerOptions options;
    options.budget = 1000;
    options.restarts = 5;
    options.seed = static_cast<std::uint64_t>(problem);
    const auto result = optimize_latent(obj, options);
    CHECK(result.best_loss.total == doctest::Approx(result.best_loss.contextual));
    const double grid = grid_minimum(obj);
    CHECK(result.best_loss.total <= grid * 1.05);
  }
}

TEST_CASE("optimizer bookkeeping") {
  const ImageShape shape{8, 8, 3};
  const auto pair = make_oracle(6, shape, 3);
  Rng rng(4);
  const Image y = testing::random_image(rng, shape);
  const auto padded = zero_pad(derive_grille(Bytes{1}, 4, 4), 8, 8);
  const auto carrier = expand_message(testing::random_message(rng, 20), y, padded, 5);
  const auto mask = build_completion_mask(Rect{2, 2, 4, 4}, padded, CompletionMode::soft);
  const InpaintingObjective obj(carrier.image, mask, carrier.image, padded, LossWeights{}, *pair.generator,
                                *pair.discriminator);

  SUBCASE("budget 1") {
    OptimizerOptions o;
    o.budget = 1;
    const auto r = optimize_latent(obj, o);
    REQUIRE(r.trace.records.size() == 1);
    CHECK(r.trace.records[0].iteration == 1);
    CHECK(r.best_loss.total == r.trace.records[0].loss.total);
    CHECK(r.trace.records[0].best_total == r.best_loss.total);
  }
  SUBCASE("determinism, monotone best and box") {
    OptimizerOptions o;
    o.budget = 150;
    o.restarts = 3;
    o.seed = 9;
    const auto a = optimize_latent(obj, o);
    const auto b = optimize_latent(obj, o);
    CHECK(a.best == b.best);
    CHECK(a.trace.to_csv() == b.trace.to_csv());
    CHECK(a.trace.records.size() == 450);
    CHECK(a.trace.best_is_non_increasing());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      CHECK(a.trace.records[i].iteration == static_cast<int>(i + 1));
      CHECK(a.trace.records[i].best_total <= a.trace.records[i].loss.total);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : a.trace.records) best = std::min(best, r.loss.total);
    CHECK(a.best_loss.total == best);
    CHECK(obj.evaluate(a.best).total == a.best_loss.total);
    for (const double v : a.best.values) CHECK(std::abs(v) <= 1.0);
  }
  SUBCASE("checkpoints equal separate runs with smaller budgets") {
    OptimizerOptions o;
    o.budget = 120;
    o.restarts = 2;
    o.seed = 5;
    o.checkpoints = {10, 40, 120};
    const auto full = optimize_latent(obj, o);
    REQUIRE(full.checkpoints.size() == 3);
    for (const auto& cp : full.checkpoints) {
      OptimizerOptions short_run = o;
      short_run.budget = cp.iteration;
      short_run.checkpoints.clear();
      const auto separate = optimize_latent(obj, short_run);
      CHECK(separate.best == cp.best);
      CHECK(separate.best_loss.total == cp.best_loss.total);
    }
    CHECK(full.checkpoints.back().best == full.best);
  }
  SUBCASE("argument checks") {
    OptimizerOptions o;
    o.budget = 0;
    CHECK_THROWS_AS(optimize_latent(obj, o), InvalidArgument);
    o.budget = 5;
    o.restarts = 0;
    CHECK_THROWS_AS(optimize_latent(obj, o), InvalidArgument);
    o.restarts = 1;
    o.checkpoints = {6};
    CHECK_THROWS_AS(optimize_latent(obj, o), InvalidArgument);
  }
}

TEST_CASE("non-finite losses abort with the iteration") {
  const ImageShape shape{2, 2, 1};
  OracleGenerator g(shape, 1, std::vector<double>(4, 0.0), std::vector<double>(4, std::nan("")));
  OracleDiscriminator d(shape, std::vector<double>(4, 0.0), 0.0);
  const Image y(shape);
  const auto padded = single_pixel_grille(2, 2, 0, 0);
  const InpaintingObjective obj(y, mask_of(2, 2, 1), y, padded, LossWeights{}, g, d);
  OptimizerOptions o;
  o.budget = 3;
  try {
    optimize_latent(obj, o);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
  }
}

TEST_CASE("trace CSV layout") {
  OptimizationTrace t;
  t.records.push_back(IterationRecord{1, LossComponents{1.5, -0.25, 2.0, 3.475}, 3.475});
  t.records.push_back(IterationRecord{2, LossComponents{1.0, -0.5, 1.0, 1.95}, 1.95});
  CHECK(t.to_csv() ==
        "iteration,L_contextual,L_perceptual,L_message,total,best_total\n"
        "1,1.5,-0.25,2,3.475,3.475\n"
        "2,1,-0.5,1,1.95,1.95\n");
  CHECK(t.best_is_non_increasing());
  t.records.push_back(IterationRecord{3, LossComponents{}, 2.0});
  CHECK_FALSE(t.best_is_non_increasing());
}

TEST_CASE("reconstruction keeps every M = 1 pixel bit-exactly") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const int h = 2 + static_cast<int>(rng.below(10));
    const int w = 2 + static_cast<int>(rng.below(10));
    const ImageShape shape{h, w, rng.bit() ? 3 : 1};
    Image y = testing::random_image(rng, shape);
    Image generated = testing::random_image(rng, shape);
    for (auto& v : generated.values()) v *= 1.5;  // exercise clipping
    const CompletionMask m{testing::random_mask(rng, h, w, rng.uniform())};
    const Image out = reconstruct(y, m, generated);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        for (int k = 0; k < shape.channels; ++k) {
          if (m.cells.at(r, c)) {
            REQUIRE(out.at(r, c, k) == y.at(r, c, k));
          } else {
            REQUIRE(out.at(r, c, k) == std::clamp(generated.at(r, c, k), -1.0, 1.0));
          }
        }
  }
  const ImageShape shape{3, 3, 1};
  const auto pair = make_oracle(2, shape, 1);
  const Image y = testing::random_image(rng, shape);
  const LatentVector z{{0.2, -0.4}};
  CHECK(reconstruct(y, mask_of(3, 3, 1), z, *pair.generator) == y);
  CHECK(reconstruct(y, mask_of(3, 3, 0), z, *pair.generator) == pair.generator->sample(z.values));
  CHECK_THROWS_AS(reconstruct(y, mask_of(2, 3, 1), y), ShapeError);
}

TEST_CASE("completion masks for both modes") {
  const auto padded = zero_pad(derive_grille(Bytes{5}, 32, 32), 64, 64);
  const Rect region = central_region(64, 64);
  const auto soft = build_completion_mask(region, padded, CompletionMode::soft);
  const auto hard = build_completion_mask(region, padded, CompletionMode::hard);
  const std::size_t cells = 64 * 64;
  CHECK(cells - soft.cells.popcount() == 1024);
  CHECK(cells - hard.cells.popcount() == 1024 - padded.popcount());
  for (const auto& [r, c] : padded.support()) CHECK(hard.cells.at(r, c) == 1);

  const auto empty = zero_pad(load_grille(BinaryMask(32, 32)), 64, 64);
  CHECK(build_completion_mask(region, empty, CompletionMode::hard).cells ==
        build_completion_mask(region, empty, CompletionMode::soft).cells);
  CHECK_THROWS_AS(build_completion_mask(Rect{40, 40, 32, 32}, padded, CompletionMode::soft), ShapeError);
}

TEST_CASE("hard mode never lets the generator touch message pixels") {
  Rng rng(13);
  const ImageShape shape{16, 16, 3};
  for (int t = 0; t < 50; ++t) {
    const auto pair = make_oracle(3, shape, rng.next_u64());
    const int si = static_cast<int>(rng.below(8));
    const auto padded = zero_pad(derive_grille(testing::random_key(rng), 8, 8), 16, 16);
    const auto m = testing::random_message(rng, rng.below(capacity(padded, 3, si) + 1));
    const Image cover = testing::random_image(rng, shape);
    const auto carrier = expand_message(m, cover, padded, si);
    const auto mask = build_completion_mask(central_region(16, 16), padded, CompletionMode::hard);
    const LatentVector z = random_z(rng, 3);
    const Image out = quantize_image(reconstruct(carrier.image, mask, z, *pair.generator));
    REQUIRE(extract_message(out, padded, si, m.size()) == m);
  }
}
