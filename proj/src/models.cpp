#include "cardan/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cardan/error.hpp"
#include "cardan/rng.hpp"
#include "digest.hpp"

namespace cardan {

static_assert(std::endian::native == std::endian::little,
              "model containers are written with native little-endian doubles");

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_latent(std::span<const double> z, int latent_dim) {
  if (z.size() != static_cast<std::size_t>(latent_dim)) {
    throw ShapeError("latent vector has " + std::to_string(z.size()) + " entries, generator expects " +
                     std::to_string(latent_dim));
  }
}

void require_image(const Image& image, ImageShape shape) {
  if (image.shape() != shape) {
    throw ShapeError("discriminator expects a " + std::to_string(shape.height) + "x" +
                     std::to_string(shape.width) + "x" + std::to_string(shape.channels) + " image");
  }
}

nlohmann::json shape_json(ImageShape s) { return {s.height, s.width, s.channels}; }

class OracleGeneratorPass final : public GeneratorPass {
 public:
  OracleGeneratorPass(const OracleGenerator& model, std::span<const double> z) : model_(model) {
    const auto d = static_cast<std::size_t>(model.latent_dim());
    const auto w = model.weights();
    const auto b = model.bias();
    output_ = Image(model.output_shape());
    auto out = output_.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < d; ++j) acc += w[i * d + j] * z[j];
      out[i] = std::tanh(acc);
    }
  }

  std::vector<double> pullback(const Image& grad_output) const override {
    require_image(grad_output, output_.shape());
    const auto d = static_cast<std::size_t>(model_.latent_dim());
    const auto w = model_.weights();
    const auto y = output_.values();
    const auto g = grad_output.values();
    std::vector<double> grad(d, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double local = g[i] * (1.0 - y[i] * y[i]);
      if (local == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) grad[j] += w[i * d + j] * local;
    }
    return grad;
  }

 private:
  const OracleGenerator& model_;
};

class OracleDiscriminatorPass final : public DiscriminatorPass {
 public:
  OracleDiscriminatorPass(const OracleDiscriminator& model, const Image& image) : model_(model) {
    const auto w = model.weights();
    const auto x = image.values();
    double acc = model.bias();
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
    logit_ = acc;
  }

  Image pullback(double grad_logit) const override {
    Image grad(model_.input_shape());
    const auto w = model_.weights();
    auto g = grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = w[i] * grad_logit;
    return grad;
  }

 private:
  const OracleDiscriminator& model_;
};

nn::Tensor to_tensor(const Image& image) {
  nn::Tensor t({image.height(), image.width(), image.channels()});
  std::copy(image.values().begin(), image.values().end(), t.data.begin());
  return t;
}

Image to_image(const nn::Tensor& t) {
  Image image({t.shape.height, t.shape.width, t.shape.channels});
  std::copy(t.data.begin(), t.data.end(), image.values().begin());
  return image;
}

class ConvGeneratorPass final : public GeneratorPass {
 public:
  ConvGeneratorPass(const nn::Network& network, std::span<const double> z) : network_(network) {
    nn::Tensor input({1, 1, static_cast<int>(z.size())});
    std::copy(z.begin(), z.end(), input.data.begin());
    tape_ = network.forward(std::move(input));
    output_ = to_image(tape_.output());
  }

  std::vector<double> pullback(const Image& grad_output) const override {
    require_image(grad_output, output_.shape());
    return network_.backward(tape_, to_tensor(grad_output)).data;
  }

 private:
  const nn::Network& network_;
  nn::Network::Tape tape_;
};

class ConvDiscriminatorPass final : public DiscriminatorPass {
 public:
  ConvDiscriminatorPass(const nn::Network& network, const Image& image) : network_(network) {
    tape_ = network.forward(to_tensor(image));
    logit_ = tape_.output().data.front();
  }

  Image pullback(double grad_logit) const override {
    nn::Tensor g({1, 1, 1}, grad_logit);
    return to_image(network_.backward(tape_, g));
  }

 private:
  const nn::Network& network_;
  nn::Network::Tape tape_;
};

int upsampling_steps(ImageShape shape) {
  if (shape.height != shape.width || shape.height < 8 || !std::has_single_bit(static_cast<unsigned>(shape.height))) {
    throw ShapeError("convolutional models need square power-of-two images of side >= 8, got " +
                     std::to_string(shape.height) + "x" + std::to_string(shape.width));
  }
  if (shape.channels < 1) throw ShapeError("image needs at least one channel");
  return std::countr_zero(static_cast<unsigned>(shape.height)) - 2;
}

}  // namespace

std::string_view to_string(ModelFamily family) noexcept {
  return family == ModelFamily::adversarial_conv ? "adversarial-conv" : "oracle-smooth";
}

namespace {
ModelFamily parse_family(const std::string& text) {
  if (text == "adversarial-conv") return ModelFamily::adversarial_conv;
  if (text == "oracle-smooth") return ModelFamily::oracle_smooth;
  throw FormatError("unknown model family '" + text + "'");
}
}  // namespace

double DiscriminatorPass::probability() const noexcept {
  return std::clamp(logistic(logit_), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

bool DiscriminatorPass::clamped() const noexcept {
  const double p = logistic(logit_);
  return p <= kProbabilityEpsilon || p >= 1.0 - kProbabilityEpsilon;
}

// --- oracle ------------------------------------------------------------------

OracleGenerator::OracleGenerator(ImageShape shape, int latent_dim, std::vector<double> weights,
                                 std::vector<double> bias, std::uint64_t seed)
    : shape_(shape), latent_dim_(latent_dim), weights_(std::move(weights)), bias_(std::move(bias)), seed_(seed) {
  if (latent_dim < 1) throw InvalidArgument("latent dimension must be at least 1");
  if (weights_.size() != shape.size() * static_cast<std::size_t>(latent_dim) || bias_.size() != shape.size()) {
    throw ShapeError("oracle generator parameters do not match its shape");
  }
}

std::unique_ptr<GeneratorPass> OracleGenerator::forward(std::span<const double> z) const {
  require_latent(z, latent_dim_);
  return std::make_unique<OracleGeneratorPass>(*this, z);
}

ModelContainer OracleGenerator::to_container() const {
  ModelContainer c;
  c.role = "generator";
  c.family = family();
  c.latent_dim = latent_dim_;
  c.shape = shape_;
  c.seed = seed_;
  c.architecture = {{"transform", "tanh(A z + b)"}};
  c.params = weights_;
  c.params.insert(c.params.end(), bias_.begin(), bias_.end());
  return c;
}

OracleDiscriminator::OracleDiscriminator(ImageShape shape, std::vector<double> weights, double bias,
                                         std::uint64_t seed)
    : shape_(shape), weights_(std::move(weights)), bias_(bias), seed_(seed) {
  if (weights_.size() != shape.size()) throw ShapeError("oracle discriminator weights do not match its shape");
}

std::unique_ptr<DiscriminatorPass> OracleDiscriminator::forward(const Image& image) const {
  require_image(image, shape_);
  return std::make_unique<OracleDiscriminatorPass>(*this, image);
}

ModelContainer OracleDiscriminator::to_container() const {
  ModelContainer c;
  c.role = "discriminator";
  c.family = family();
  c.shape = shape_;
  c.seed = seed_;
  c.architecture = {{"transform", "logistic(<w, x> + c)"}};
  c.params = weights_;
  c.params.push_back(bias_);
  return c;
}

ModelPair make_oracle(int latent_dim, ImageShape shape, std::uint64_t seed) {
  if (latent_dim < 1) throw InvalidArgument("latent dimension must be at least 1");
  Rng rng(seed);
  const std::size_t pixels = shape.size();
  std::vector<double> a(pixels * static_cast<std::size_t>(latent_dim));
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  for (auto& v : a) v = rng.normal(0.0, a_scale);
  std::vector<double> b(pixels);
  for (auto& v : b) v = rng.normal(0.0, 0.3);
  std::vector<double> w(pixels);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(pixels));
  for (auto& v : w) v = rng.normal(0.0, w_scale);
  const double c = rng.normal(0.0, 0.1);
  return ModelPair{std::make_unique<OracleGenerator>(shape, latent_dim, std::move(a), std::move(b), seed),
                   std::make_unique<OracleDiscriminator>(shape, std::move(w), c, seed)};
}

// --- convolutional -----------------------------------------------------------

ConvGenerator::ConvGenerator(nn::Network network, int latent_dim, ImageShape shape, std::uint64_t seed)
    : network_(std::move(network)), latent_dim_(latent_dim), shape_(shape), seed_(seed) {
  const auto in = network_.input_shape();
  const auto out = network_.output_shape();
  if (in != nn::TensorShape{1, 1, latent_dim} ||
      out != nn::TensorShape{shape.height, shape.width, shape.channels}) {
    throw ShapeError("generator network does not match the declared latent/image shape");
  }
}

std::unique_ptr<GeneratorPass> ConvGenerator::forward(std::span<const double> z) const {
  require_latent(z, latent_dim_);
  return std::make_unique<ConvGeneratorPass>(network_, z);
}

ModelContainer ConvGenerator::to_container() const {
  ModelContainer c;
  c.role = "generator";
  c.family = family();
  c.latent_dim = latent_dim_;
  c.shape = shape_;
  c.seed = seed_;
  c.architecture = network_.describe();
  c.params.assign(network_.params().begin(), network_.params().end());
  return c;
}

ConvDiscriminator::ConvDiscriminator(nn::Network network, ImageShape shape, std::uint64_t seed)
    : network_(std::move(network)), shape_(shape), seed_(seed) {
  if (network_.input_shape() != nn::TensorShape{shape.height, shape.width, shape.channels} ||
      network_.output_shape().size() != 1) {
    throw ShapeError("discriminator network does not match the declared image shape");
  }
}

std::unique_ptr<DiscriminatorPass> ConvDiscriminator::forward(const Image& image) const {
  require_image(image, shape_);
  return std::make_unique<ConvDiscriminatorPass>(network_, image);
}

ModelContainer ConvDiscriminator::to_container() const {
  ModelContainer c;
  c.role = "discriminator";
  c.family = family();
  c.shape = shape_;
  c.seed = seed_;
  c.architecture = network_.describe();
  c.params.assign(network_.params().begin(), network_.params().end());
  return c;
}

std::unique_ptr<ConvGenerator> make_conv_generator(ImageShape shape, ConvArchitecture arch,
                                                   std::uint64_t seed) {
  const int steps = upsampling_steps(shape);
  if (arch.latent_dim < 1 || arch.base_width < 1) {
    throw InvalidArgument("latent dimension and base width must be positive");
  }
  std::vector<std::unique_ptr<nn::Layer>> layers;
  int channels = arch.base_width << (steps - 1);
  layers.push_back(nn::make_dense(4 * 4 * channels));
  layers.push_back(nn::make_reshape({4, 4, channels}));
  layers.push_back(nn::make_relu());
  for (int s = 0; s < steps - 1; ++s) {
    channels /= 2;
    layers.push_back(nn::make_conv_transpose(channels));
    layers.push_back(nn::make_relu());
  }
  layers.push_back(nn::make_conv_transpose(shape.channels));
  layers.push_back(nn::make_tanh());

  nn::Network network({1, 1, arch.latent_dim}, std::move(layers));
  Rng rng(seed);
  network.initialize(rng);
  return std::make_unique<ConvGenerator>(std::move(network), arch.latent_dim, shape, seed);
}

std::unique_ptr<ConvDiscriminator> make_conv_discriminator(ImageShape shape, ConvArchitecture arch,
                                                           std::uint64_t seed) {
  const int steps = upsampling_steps(shape);
  if (arch.base_width < 1) throw InvalidArgument("base width must be positive");
  std::vector<std::unique_ptr<nn::Layer>> layers;
  int channels = arch.base_width;
  for (int s = 0; s < steps; ++s) {
    layers.push_back(nn::make_conv(channels));
    layers.push_back(nn::make_leaky_relu(0.2));
    channels *= 2;
  }
  layers.push_back(nn::make_dense(1));

  nn::Network network({shape.height, shape.width, shape.channels}, std::move(layers));
  Rng rng(derive_seed(seed, 1));
  network.initialize(rng);
  return std::make_unique<ConvDiscriminator>(std::move(network), shape, seed);
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'A', 'R', 'D', 'A', 'N', 'M', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw FormatError("model file is truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing model file " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read model file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageShape shape_from_json(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelContainer& c) {
  const nlohmann::json header = {{"role", c.role},
                                 {"family", std::string(to_string(c.family))},
                                 {"latent_dim", c.latent_dim},
                                 {"shape", shape_json(c.shape)},
                                 {"seed", c.seed},
                                 {"architecture", c.architecture}};
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  put(out, static_cast<std::uint64_t>(c.params.size()));
  for (const double v : c.params) put(out, v);
  const auto digest = detail::sha256(out);
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

ModelContainer deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 32 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a cardan model file");
  }
  const auto body = bytes.first(bytes.size() - 32);
  const auto digest = detail::sha256(body);
  if (!std::equal(digest.begin(), digest.end(), bytes.end() - 32)) {
    throw FormatError("model file integrity check failed (digest mismatch)");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(body, pos);
  if (version != kVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  const auto header_length = take<std::uint32_t>(body, pos);
  if (pos + header_length > body.size()) throw FormatError("model file is truncated");
  ModelContainer c;
  try {
    const auto header = nlohmann::json::parse(body.begin() + static_cast<std::ptrdiff_t>(pos),
                                              body.begin() + static_cast<std::ptrdiff_t>(pos + header_length));
    c.role = header.at("role").get<std::string>();
    c.family = parse_family(header.at("family").get<std::string>());
    c.latent_dim = header.at("latent_dim").get<int>();
    c.shape = shape_from_json(header.at("shape"));
    c.seed = header.at("seed").get<std::uint64_t>();
    c.architecture = header.at("architecture");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model header: ") + e.what());
  }
  pos += header_length;
  const auto count = take<std::uint64_t>(body, pos);
  if (count > (body.size() - pos) / sizeof(double) || pos + count * sizeof(double) != body.size()) {
    throw FormatError("model parameter blob has the wrong length");
  }
  c.params.resize(count);
  for (auto& v : c.params) v = take<double>(body, pos);
  return c;
}

namespace {

std::unique_ptr<Generator> generator_from_container(ModelContainer c) {
  if (c.role != "generator") throw FormatError("model file holds a " + c.role + ", expected a generator");
  if (c.family == ModelFamily::oracle_smooth) {
    const std::size_t pixels = c.shape.size();
    if (c.latent_dim < 1 || c.params.size() != pixels * static_cast<std::size_t>(c.latent_dim + 1)) {
      throw FormatError("oracle generator parameter count does not match its shape");
    }
    std::vector<double> bias(c.params.end() - static_cast<std::ptrdiff_t>(pixels), c.params.end());
    c.params.resize(pixels * static_cast<std::size_t>(c.latent_dim));
    return std::make_unique<OracleGenerator>(c.shape, c.latent_dim, std::move(c.params), std::move(bias), c.seed);
  }
  auto network = nn::Network::from_description(c.architecture);
  if (network.param_count() != c.params.size()) {
    throw FormatError("generator parameter count does not match its architecture");
  }
  std::copy(c.params.begin(), c.params.end(), network.params().begin());
  return std::make_unique<ConvGenerator>(std::move(network), c.latent_dim, c.shape, c.seed);
}

std::unique_ptr<Discriminator> discriminator_from_container(ModelContainer c) {
  if (c.role != "discriminator") {
    throw FormatError("model file holds a " + c.role + ", expected a discriminator");
  }
  if (c.family == ModelFamily::oracle_smooth) {
    if (c.params.size() != c.shape.size() + 1) {
      throw FormatError("oracle discriminator parameter count does not match its shape");
    }
    const double bias = c.params.back();
    c.params.pop_back();
    return std::make_unique<OracleDiscriminator>(c.shape, std::move(c.params), bias, c.seed);
  }
  auto network = nn::Network::from_description(c.architecture);
  if (network.param_count() != c.params.size()) {
    throw FormatError("discriminator parameter count does not match its architecture");
  }
  std::copy(c.params.begin(), c.params.end(), network.params().begin());
  return std::make_unique<ConvDiscriminator>(std::move(network), c.shape, c.seed);
}

}  // namespace

void save_model(const Generator& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model.to_container()));
}

void save_model(const Discriminator& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model.to_container()));
}

std::unique_ptr<Generator> load_generator(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return generator_from_container(deserialize_model(bytes));
}

std::unique_ptr<Discriminator> load_discriminator(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return discriminator_from_container(deserialize_model(bytes));
}

void save_model_pair(const ModelPair& pair, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  save_model(*pair.generator, directory / "generator.model");
  save_model(*pair.discriminator, directory / "discriminator.model");
}

ModelPair load_model_pair(const std::filesystem::path& directory, std::optional<ImageShape> expected_shape) {
  ModelPair pair{load_generator(directory / "generator.model"),
                 load_discriminator(directory / "discriminator.model")};
  if (pair.generator->output_shape() != pair.discriminator->input_shape()) {
    throw ShapeError("generator and discriminator disagree on the image shape");
  }
  if (expected_shape && pair.generator->output_shape() != *expected_shape) {
    const auto s = pair.generator->output_shape();
    throw ShapeError("model produces " + std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
                     std::to_string(s.channels) + " images, pipeline expects " +
                     std::to_string(expected_shape->height) + "x" + std::to_string(expected_shape->width) +
                     "x" + std::to_string(expected_shape->channels));
  }
  return pair;
}

std::string model_fingerprint(const Generator& generator, const Discriminator& discriminator) {
  detail::Sha256 hasher;
  hasher.update(serialize_model(generator.to_container()));
  hasher.update(serialize_model(discriminator.to_container()));
  return detail::hex_prefix(hasher.finish(), 16);
}

}  // namespace cardan
