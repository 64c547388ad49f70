#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardan/image.hpp"
#include "cardan/nn.hpp"

namespace cardan {

enum class ModelFamily { adversarial_conv, oracle_smooth };

std::string_view to_string(ModelFamily family) noexcept;

/// Clamp applied to discriminator probabilities so log(1 - D) stays finite.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// One evaluation of G(z) that can pull image-space gradients back to z.
class GeneratorPass {
 public:
  virtual ~GeneratorPass() = default;
  const Image& output() const noexcept { return output_; }
  /// Vector-Jacobian product: returns (dG/dz)^T * grad_output.
  virtual std::vector<double> pullback(const Image& grad_output) const = 0;

 protected:
  Image output_;
};

/// One evaluation of D(x).
class DiscriminatorPass {
 public:
  virtual ~DiscriminatorPass() = default;
  double logit() const noexcept { return logit_; }
  /// Logistic of the logit, clamped to [eps, 1 - eps].
  double probability() const noexcept;
  /// True when the clamp is active, i.e. the probability is locally constant.
  bool clamped() const noexcept;
  /// Returns d(logit)/d(input) * grad_logit.
  virtual Image pullback(double grad_logit) const = 0;

 protected:
  double logit_ = 0.0;
};

/// Versioned on-disk representation shared by every model family.
struct ModelContainer {
  std::string role;  // "generator" | "discriminator"
  ModelFamily family = ModelFamily::adversarial_conv;
  int latent_dim = 0;
  ImageShape shape;
  std::uint64_t seed = 0;
  nlohmann::json architecture;
  std::vector<double> params;
};

/// G: latent vector in [-1, 1]^d -> image in [-1, 1]. Immutable; safe to
/// share across threads.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual ModelFamily family() const noexcept = 0;
  virtual int latent_dim() const noexcept = 0;
  virtual ImageShape output_shape() const noexcept = 0;
  /// Throws ShapeError when z has the wrong dimension.
  virtual std::unique_ptr<GeneratorPass> forward(std::span<const double> z) const = 0;
  virtual ModelContainer to_container() const = 0;

  Image sample(std::span<const double> z) const { return forward(z)->output(); }
};

/// D: image -> probability that the image is real.
class Discriminator {
 public:
  virtual ~Discriminator() = default;
  virtual ModelFamily family() const noexcept = 0;
  virtual ImageShape input_shape() const noexcept = 0;
  /// Throws ShapeError when the image has the wrong shape.
  virtual std::unique_ptr<DiscriminatorPass> forward(const Image& image) const = 0;
  virtual ModelContainer to_container() const = 0;

  /// Probability in [eps, 1 - eps].
  double discriminate(const Image& image) const { return forward(image)->probability(); }
};

// --- smooth analytic oracle --------------------------------------------------

/// G(z) = tanh(A z + b), A is (pixels x d) row-major.
class OracleGenerator final : public Generator {
 public:
  OracleGenerator(ImageShape shape, int latent_dim, std::vector<double> weights,
                  std::vector<double> bias, std::uint64_t seed = 0);

  ModelFamily family() const noexcept override { return ModelFamily::oracle_smooth; }
  int latent_dim() const noexcept override { return latent_dim_; }
  ImageShape output_shape() const noexcept override { return shape_; }
  std::unique_ptr<GeneratorPass> forward(std::span<const double> z) const override;
  ModelContainer to_container() const override;

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> bias() const noexcept { return bias_; }

 private:
  ImageShape shape_;
  int latent_dim_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::uint64_t seed_;
};

/// D(x) = logistic(<w, x> + c).
class OracleDiscriminator final : public Discriminator {
 public:
  OracleDiscriminator(ImageShape shape, std::vector<double> weights, double bias,
                      std::uint64_t seed = 0);

  ModelFamily family() const noexcept override { return ModelFamily::oracle_smooth; }
  ImageShape input_shape() const noexcept override { return shape_; }
  std::unique_ptr<DiscriminatorPass> forward(const Image& image) const override;
  ModelContainer to_container() const override;

  std::span<const double> weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }

 private:
  ImageShape shape_;
  std::vector<double> weights_;
  double bias_;
  std::uint64_t seed_;
};

struct ModelPair {
  std::unique_ptr<Generator> generator;
  std::unique_ptr<Discriminator> discriminator;
};

/// Seeded oracle pair: A ~ N(0, 1/d), b ~ N(0, 0.3^2), w ~ N(0, 1/pixels),
/// c ~ N(0, 0.1^2). Throws InvalidArgument for d < 1.
ModelPair make_oracle(int latent_dim, ImageShape shape, std::uint64_t seed);

// --- strided convolutional adversarial pair ----------------------------------

/// Small DCGAN-style generator: dense -> 4x4 feature map -> stride-2
/// transposed convolutions with ReLU -> tanh output.
class ConvGenerator final : public Generator {
 public:
  ConvGenerator(nn::Network network, int latent_dim, ImageShape shape, std::uint64_t seed);

  ModelFamily family() const noexcept override { return ModelFamily::adversarial_conv; }
  int latent_dim() const noexcept override { return latent_dim_; }
  ImageShape output_shape() const noexcept override { return shape_; }
  std::unique_ptr<GeneratorPass> forward(std::span<const double> z) const override;
  ModelContainer to_container() const override;

  nn::Network& network() noexcept { return network_; }
  const nn::Network& network() const noexcept { return network_; }

 private:
  nn::Network network_;
  int latent_dim_;
  ImageShape shape_;
  std::uint64_t seed_;
};

/// Mirror of the generator: stride-2 convolutions with leaky ReLU -> dense logit.
class ConvDiscriminator final : public Discriminator {
 public:
  ConvDiscriminator(nn::Network network, ImageShape shape, std::uint64_t seed);

  ModelFamily family() const noexcept override { return ModelFamily::adversarial_conv; }
  ImageShape input_shape() const noexcept override { return shape_; }
  std::unique_ptr<DiscriminatorPass> forward(const Image& image) const override;
  ModelContainer to_container() const override;

  nn::Network& network() noexcept { return network_; }
  const nn::Network& network() const noexcept { return network_; }

 private:
  nn::Network network_;
  ImageShape shape_;
  std::uint64_t seed_;
};

struct ConvArchitecture {
  int latent_dim = 100;
  /// Channels of the last hidden layer; earlier layers double it.
  int base_width = 16;
};

/// Square power-of-two images of side >= 8 only; throws ShapeError otherwise.
std::unique_ptr<ConvGenerator> make_conv_generator(ImageShape shape, ConvArchitecture arch,
                                                   std::uint64_t seed);
std::unique_ptr<ConvDiscriminator> make_conv_discriminator(ImageShape shape, ConvArchitecture arch,
                                                           std::uint64_t seed);

// --- persistence -------------------------------------------------------------

/// File layout (little endian):
///   8 bytes  magic "CARDANMD"
///   u32      format version (1)
///   u32      header length n
///   n bytes  JSON header {role, family, latent_dim, shape[h,w,c], seed, architecture}
///   u64      parameter count p
///   8p bytes IEEE-754 doubles
///   32 bytes SHA-256 of everything above
/// Load rejects a bad magic, an unknown version, a digest mismatch or
/// truncation with FormatError.
void save_model(const Generator& model, const std::filesystem::path& path);
void save_model(const Discriminator& model, const std::filesystem::path& path);
std::unique_ptr<Generator> load_generator(const std::filesystem::path& path);
std::unique_ptr<Discriminator> load_discriminator(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_model(const ModelContainer& container);
ModelContainer deserialize_model(std::span<const std::uint8_t> bytes);

/// Directory holding "generator.model" and "discriminator.model".
void save_model_pair(const ModelPair& pair, const std::filesystem::path& directory);
/// Throws ShapeError when `expected_shape` is given and either model differs.
ModelPair load_model_pair(const std::filesystem::path& directory,
                          std::optional<ImageShape> expected_shape = std::nullopt);

/// First 16 hex digits of SHA-256 over both serialized models.
std::string model_fingerprint(const Generator& generator, const Discriminator& discriminator);

}  // namespace cardan
