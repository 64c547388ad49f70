#include "cardan/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "cardan/error.hpp"
#include "cardan/rng.hpp"

namespace cardan {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)) and -log(1 - sigmoid(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::vector<double> draw_latent(Rng& rng, int dim) {
  std::vector<double> z(static_cast<std::size_t>(dim));
  for (auto& v : z) v = rng.uniform(-1.0, 1.0);
  return z;
}

nn::Tensor image_tensor(const Image& image) {
  nn::Tensor t({image.height(), image.width(), image.channels()});
  std::copy(image.values().begin(), image.values().end(), t.data.begin());
  return t;
}

void scale(std::vector<double>& values, double factor) {
  for (auto& v : values) v *= factor;
}

void write_checkpoint(const ConvGenerator& g, const ConvDiscriminator& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_model(g, dir / "generator.model");
  save_model(d, dir / "discriminator.model");
}

}  // namespace

TrainingResult train_adversarial(const Dataset& dataset, const TrainingConfig& config, std::ostream* progress) {
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  if (config.epochs < 0 || config.batch_size < 1 || config.checkpoint_every < 1 ||
      !(config.generator_learning_rate > 0.0) || !(config.discriminator_learning_rate > 0.0)) {
    throw InvalidArgument("training epochs must be >= 0 and batch size, cadence and learning rates positive");
  }
  const ImageShape shape = dataset.front().pixels.shape();
  for (const auto& record : dataset) {
    if (record.pixels.shape() != shape) {
      throw InvalidArgument("training image " + record.source + " does not match the dataset shape");
    }
  }

  auto generator = make_conv_generator(shape, config.architecture, config.seed);
  auto discriminator = make_conv_discriminator(shape, config.architecture, config.seed);
  auto& g_net = generator->network();
  auto& d_net = discriminator->network();

  nn::Adam g_opt(g_net.param_count(), config.generator_learning_rate, config.beta1);
  nn::Adam d_opt(d_net.param_count(), config.discriminator_learning_rate, config.beta1);
  std::vector<double> g_grad(g_net.param_count());
  std::vector<double> d_grad(d_net.param_count());

  Rng rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const int latent = config.architecture.latent_dim;

  TrainingResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double d_loss_sum = 0.0;
    double g_loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t judged = 0;
    std::size_t samples = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double batch = static_cast<double>(end - start);

      // Discriminator: real -> 1, fake -> 0.
      std::fill(d_grad.begin(), d_grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto real_tape = d_net.forward(image_tensor(dataset[order[k]].pixels));
        const double real_logit = real_tape.output().data[0];
        d_net.backward(real_tape, nn::Tensor({1, 1, 1}, logistic(real_logit) - 1.0), d_grad);

        const auto fake = generator->sample(draw_latent(rng, latent));
        const auto fake_tape = d_net.forward(image_tensor(fake));
        const double fake_logit = fake_tape.output().data[0];
        d_net.backward(fake_tape, nn::Tensor({1, 1, 1}, logistic(fake_logit)), d_grad);

        d_loss_sum += softplus(-real_logit) + softplus(fake_logit);
        correct += (real_logit > 0.0) + (fake_logit < 0.0);
        judged += 2;
      }
      scale(d_grad, 1.0 / batch);
      d_opt.step(d_net.params(), d_grad);

      // Generator: non-saturating loss -log D(G(z)).
      std::fill(g_grad.begin(), g_grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        nn::Tensor z({1, 1, latent});
        z.data = draw_latent(rng, latent);
        const auto g_tape = g_net.forward(std::move(z));
        const auto d_tape = d_net.forward(g_tape.output());
        const double logit = d_tape.output().data[0];
        const auto grad_image = d_net.backward(d_tape, nn::Tensor({1, 1, 1}, logistic(logit) - 1.0));
        g_net.backward(g_tape, grad_image, g_grad);
        g_loss_sum += softplus(-logit);
      }
      scale(g_grad, 1.0 / batch);
      g_opt.step(g_net.params(), g_grad);
      samples += end - start;
    }

    EpochRecord record{epoch, d_loss_sum / static_cast<double>(samples),
                       g_loss_sum / static_cast<double>(samples),
                       static_cast<double>(correct) / static_cast<double>(judged)};
    if (!std::isfinite(record.discriminator_loss) || !std::isfinite(record.generator_loss)) {
      throw NumericalError("training loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.log.push_back(record);
    if (progress != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line, "epoch %d/%d  d_loss %.4f  g_loss %.4f  d_acc %.3f\n", epoch,
                    config.epochs, record.discriminator_loss, record.generator_loss,
                    record.discriminator_accuracy);
      *progress << line << std::flush;
    }
    if (config.checkpoint_dir && epoch % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04d", epoch);
      write_checkpoint(*generator, *discriminator, *config.checkpoint_dir / name);
    }
  }

  if (config.checkpoint_dir) {
    write_checkpoint(*generator, *discriminator, *config.checkpoint_dir);
    std::ofstream log(*config.checkpoint_dir / "training_log.csv", std::ios::binary);
    log << training_log_csv(result.log);
  }
  result.models = ModelPair{std::move(generator), std::move(discriminator)};
  return result;
}

double discriminator_accuracy(const Generator& generator, const Discriminator& discriminator,
                              const Dataset& dataset, int fakes, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t correct = 0;
  for (const auto& record : dataset) correct += discriminator.discriminate(record.pixels) > 0.5;
  for (int i = 0; i < fakes; ++i) {
    correct += discriminator.discriminate(generator.sample(draw_latent(rng, generator.latent_dim()))) <= 0.5;
  }
  const auto total = dataset.size() + static_cast<std::size_t>(std::max(fakes, 0));
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::string training_log_csv(const std::vector<EpochRecord>& log) {
  std::string out = "epoch,discriminator_loss,generator_loss,discriminator_accuracy\n";
  char line[128];
  for (const auto& r : log) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f\n", r.epoch, r.discriminator_loss, r.generator_loss,
                  r.discriminator_accuracy);
    out += line;
  }
  return out;
}

}  // namespace cardan
