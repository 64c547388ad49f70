#include "cardan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cardan/error.hpp"

namespace cardan::nn {

namespace {

constexpr int kKernel = 4;

double he_stddev(std::size_t fan_in) { return std::sqrt(2.0 / static_cast<double>(fan_in)); }

class Dense final : public Layer {
 public:
  explicit Dense(int outputs) : outputs_(outputs) {
    if (outputs < 1) throw InvalidArgument("dense layer needs at least one output");
  }

  std::string kind() const override { return "dense"; }
  nlohmann::json describe() const override { return {{"kind", kind()}, {"outputs", outputs_}}; }
  TensorShape output_shape(TensorShape) const override { return {1, 1, outputs_}; }
  std::size_t param_count(TensorShape input) const override {
    return static_cast<std::size_t>(outputs_) * (input.size() + 1);
  }
  void initialize(std::span<double> params, TensorShape input, Rng& rng) const override {
    const auto n = input.size();
    const double stddev = he_stddev(n);
    for (std::size_t i = 0; i < static_cast<std::size_t>(outputs_) * n; ++i) {
      params[i] = rng.normal(0.0, stddev);
    }
    std::fill(params.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(outputs_) * n),
              params.end(), 0.0);
  }

  void forward(const Tensor& input, Tensor& output, std::span<const double> params) const override {
    const std::size_t n = input.data.size();
    const double* bias = params.data() + static_cast<std::size_t>(outputs_) * n;
    for (int o = 0; o < outputs_; ++o) {
      const double* row = params.data() + static_cast<std::size_t>(o) * n;
      double acc = bias[o];
      for (std::size_t i = 0; i < n; ++i) acc += row[i] * input.data[i];
      output.data[static_cast<std::size_t>(o)] = acc;
    }
  }

  void backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                std::span<const double> params, std::span<double> param_grad) const override {
    const std::size_t n = input.data.size();
    for (int o = 0; o < outputs_; ++o) {
      const double g = grad_output.data[static_cast<std::size_t>(o)];
      const double* row = params.data() + static_cast<std::size_t>(o) * n;
      if (grad_input != nullptr) {
        for (std::size_t i = 0; i < n; ++i) grad_input->data[i] += row[i] * g;
      }
      if (!param_grad.empty()) {
        double* grow = param_grad.data() + static_cast<std::size_t>(o) * n;
        for (std::size_t i = 0; i < n; ++i) grow[i] += g * input.data[i];
        param_grad[static_cast<std::size_t>(outputs_) * n + static_cast<std::size_t>(o)] += g;
      }
    }
  }

 private:
  int outputs_;
};

class Reshape final : public Layer {
 public:
  explicit Reshape(TensorShape shape) : shape_(shape) {}

  std::string kind() const override { return "reshape"; }
  nlohmann::json describe() const override {
    return {{"kind", kind()},
            {"height", shape_.height},
            {"width", shape_.width},
            {"channels", shape_.channels}};
  }
  TensorShape output_shape(TensorShape input) const override {
    if (input.size() != shape_.size()) throw ShapeError("reshape changes the element count");
    return shape_;
  }
  void forward(const Tensor& input, Tensor& output, std::span<const double>) const override {
    output.data = input.data;
  }
  void backward(const Tensor&, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                std::span<const double>, std::span<double>) const override {
    if (grad_input != nullptr) {
      for (std::size_t i = 0; i < grad_output.data.size(); ++i) grad_input->data[i] += grad_output.data[i];
    }
  }

 private:
  TensorShape shape_;
};

/// Shared 4x4 / stride 2 / padding 1 geometry. Weights are laid out
/// [ky][kx][in_channel][out_channel] followed by one bias per out channel, so
/// the innermost loops run over contiguous channels of HWC activations.
class StridedConvBase : public Layer {
 public:
  explicit StridedConvBase(int out_channels) : out_channels_(out_channels) {
    if (out_channels < 1) throw InvalidArgument("convolution needs at least one output channel");
  }

  std::size_t param_count(TensorShape input) const override {
    return static_cast<std::size_t>(kKernel * kKernel) * static_cast<std::size_t>(input.channels) *
               static_cast<std::size_t>(out_channels_) +
           static_cast<std::size_t>(out_channels_);
  }
  void initialize(std::span<double> params, TensorShape input, Rng& rng) const override {
    const std::size_t weights = param_count(input) - static_cast<std::size_t>(out_channels_);
    const double stddev = he_stddev(fan_in(input));
    for (std::size_t i = 0; i < weights; ++i) params[i] = rng.normal(0.0, stddev);
    std::fill(params.begin() + static_cast<std::ptrdiff_t>(weights), params.end(), 0.0);
  }

 protected:
  virtual std::size_t fan_in(TensorShape input) const = 0;

  /// Calls visit(small_index, large_index, tap) for every (small pixel, large
  /// pixel, kernel tap) connection of the stride-2 geometry, where the large
  /// side is twice the small side.
  template <typename Visit>
  static void for_each_connection(int small_h, int small_w, Visit&& visit) {
    const int large_h = small_h * 2;
    const int large_w = small_w * 2;
    for (int sy = 0; sy < small_h; ++sy) {
      for (int sx = 0; sx < small_w; ++sx) {
        const std::size_t small_index = static_cast<std::size_t>(sy * small_w + sx);
        for (int ky = 0; ky < kKernel; ++ky) {
          const int ly = 2 * sy - 1 + ky;
          if (ly < 0 || ly >= large_h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int lx = 2 * sx - 1 + kx;
            if (lx < 0 || lx >= large_w) continue;
            visit(small_index, static_cast<std::size_t>(ly * large_w + lx),
                  static_cast<std::size_t>(ky * kKernel + kx));
          }
        }
      }
    }
  }

  int out_channels_;
};

class ConvTranspose final : public StridedConvBase {
 public:
  using StridedConvBase::StridedConvBase;

  std::string kind() const override { return "conv_transpose"; }
  nlohmann::json describe() const override {
    return {{"kind", kind()}, {"out_channels", out_channels_}};
  }
  TensorShape output_shape(TensorShape input) const override {
    return {input.height * 2, input.width * 2, out_channels_};
  }

  void forward(const Tensor& input, Tensor& output, std::span<const double> params) const override {
    const auto cin = static_cast<std::size_t>(input.shape.channels);
    const auto cout = static_cast<std::size_t>(out_channels_);
    const double* weights = params.data();
    const double* bias = params.data() + kKernel * kKernel * cin * cout;
    for (std::size_t p = 0; p < output.data.size(); p += cout) {
      std::copy(bias, bias + cout, output.data.begin() + static_cast<std::ptrdiff_t>(p));
    }
    for_each_connection(input.shape.height, input.shape.width,
                        [&](std::size_t small, std::size_t large, std::size_t tap) {
                          const double* in = input.data.data() + small * cin;
                          double* out = output.data.data() + large * cout;
                          const double* w = weights + tap * cin * cout;
                          for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double v = in[ci];
                            const double* row = w + ci * cout;
                            for (std::size_t co = 0; co < cout; ++co) out[co] += v * row[co];
                          }
                        });
  }

  void backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                std::span<const double> params, std::span<double> param_grad) const override {
    const auto cin = static_cast<std::size_t>(input.shape.channels);
    const auto cout = static_cast<std::size_t>(out_channels_);
    const double* weights = params.data();
    for_each_connection(input.shape.height, input.shape.width,
                        [&](std::size_t small, std::size_t large, std::size_t tap) {
                          const double* in = input.data.data() + small * cin;
                          const double* g = grad_output.data.data() + large * cout;
                          const double* w = weights + tap * cin * cout;
                          if (grad_input != nullptr) {
                            double* gin = grad_input->data.data() + small * cin;
                            for (std::size_t ci = 0; ci < cin; ++ci) {
                              const double* row = w + ci * cout;
                              double acc = 0.0;
                              for (std::size_t co = 0; co < cout; ++co) acc += row[co] * g[co];
                              gin[ci] += acc;
                            }
                          }
                          if (!param_grad.empty()) {
                            double* gw = param_grad.data() + tap * cin * cout;
                            for (std::size_t ci = 0; ci < cin; ++ci) {
                              const double v = in[ci];
                              double* row = gw + ci * cout;
                              for (std::size_t co = 0; co < cout; ++co) row[co] += v * g[co];
                            }
                          }
                        });
    if (!param_grad.empty()) {
      double* gb = param_grad.data() + kKernel * kKernel * cin * cout;
      for (std::size_t p = 0; p < grad_output.data.size(); p += cout) {
        for (std::size_t co = 0; co < cout; ++co) gb[co] += grad_output.data[p + co];
      }
    }
  }

 protected:
  // Each output pixel receives 4 taps per input channel.
  std::size_t fan_in(TensorShape input) const override {
    return 4 * static_cast<std::size_t>(input.channels);
  }
};

class Conv final : public StridedConvBase {
 public:
  using StridedConvBase::StridedConvBase;

  std::string kind() const override { return "conv"; }
  nlohmann::json describe() const override {
    return {{"kind", kind()}, {"out_channels", out_channels_}};
  }
  TensorShape output_shape(TensorShape input) const override {
    if (input.height % 2 != 0 || input.width % 2 != 0) {
      throw ShapeError("strided convolution needs even spatial dimensions");
    }
    return {input.height / 2, input.width / 2, out_channels_};
  }

  void forward(const Tensor& input, Tensor& output, std::span<const double> params) const override {
    const auto cin = static_cast<std::size_t>(input.shape.channels);
    const auto cout = static_cast<std::size_t>(out_channels_);
    const double* weights = params.data();
    const double* bias = params.data() + kKernel * kKernel * cin * cout;
    for (std::size_t p = 0; p < output.data.size(); p += cout) {
      std::copy(bias, bias + cout, output.data.begin() + static_cast<std::ptrdiff_t>(p));
    }
    for_each_connection(output.shape.height, output.shape.width,
                        [&](std::size_t small, std::size_t large, std::size_t tap) {
                          const double* in = input.data.data() + large * cin;
                          double* out = output.data.data() + small * cout;
                          const double* w = weights + tap * cin * cout;
                          for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double v = in[ci];
                            const double* row = w + ci * cout;
                            for (std::size_t co = 0; co < cout; ++co) out[co] += v * row[co];
                          }
                        });
  }

  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                Tensor* grad_input, std::span<const double> params,
                std::span<double> param_grad) const override {
    const auto cin = static_cast<std::size_t>(input.shape.channels);
    const auto cout = static_cast<std::size_t>(out_channels_);
    const double* weights = params.data();
    for_each_connection(output.shape.height, output.shape.width,
                        [&](std::size_t small, std::size_t large, std::size_t tap) {
                          const double* in = input.data.data() + large * cin;
                          const double* g = grad_output.data.data() + small * cout;
                          const double* w = weights + tap * cin * cout;
                          if (grad_input != nullptr) {
                            double* gin = grad_input->data.data() + large * cin;
                            for (std::size_t ci = 0; ci < cin; ++ci) {
                              const double* row = w + ci * cout;
                              double acc = 0.0;
                              for (std::size_t co = 0; co < cout; ++co) acc += row[co] * g[co];
                              gin[ci] += acc;
                            }
                          }
                          if (!param_grad.empty()) {
                            double* gw = param_grad.data() + tap * cin * cout;
                            for (std::size_t ci = 0; ci < cin; ++ci) {
                              const double v = in[ci];
                              double* row = gw + ci * cout;
                              for (std::size_t co = 0; co < cout; ++co) row[co] += v * g[co];
                            }
                          }
                        });
    if (!param_grad.empty()) {
      double* gb = param_grad.data() + kKernel * kKernel * cin * cout;
      for (std::size_t p = 0; p < grad_output.data.size(); p += cout) {
        for (std::size_t co = 0; co < cout; ++co) gb[co] += grad_output.data[p + co];
      }
    }
  }

 protected:
  std::size_t fan_in(TensorShape input) const override {
    return static_cast<std::size_t>(kKernel * kKernel) * static_cast<std::size_t>(input.channels);
  }
};

class Elementwise : public Layer {
 public:
  TensorShape output_shape(TensorShape input) const override { return input; }

  void forward(const Tensor& input, Tensor& output, std::span<const double>) const override {
    for (std::size_t i = 0; i < input.data.size(); ++i) output.data[i] = apply(input.data[i]);
  }
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                Tensor* grad_input, std::span<const double>, std::span<double>) const override {
    if (grad_input == nullptr) return;
    for (std::size_t i = 0; i < input.data.size(); ++i) {
      grad_input->data[i] += grad_output.data[i] * derivative(input.data[i], output.data[i]);
    }
  }

 protected:
  virtual double apply(double x) const = 0;
  virtual double derivative(double x, double y) const = 0;
};

class Relu final : public Elementwise {
 public:
  std::string kind() const override { return "relu"; }

 protected:
  double apply(double x) const override { return x > 0.0 ? x : 0.0; }
  double derivative(double x, double) const override { return x > 0.0 ? 1.0 : 0.0; }
};

class LeakyRelu final : public Elementwise {
 public:
  explicit LeakyRelu(double slope) : slope_(slope) {}
  std::string kind() const override { return "leaky_relu"; }
  nlohmann::json describe() const override { return {{"kind", kind()}, {"slope", slope_}}; }

 protected:
  double apply(double x) const override { return x > 0.0 ? x : slope_ * x; }
  double derivative(double x, double) const override { return x > 0.0 ? 1.0 : slope_; }

 private:
  double slope_;
};

class Tanh final : public Elementwise {
 public:
  std::string kind() const override { return "tanh"; }

 protected:
  double apply(double x) const override { return std::tanh(x); }
  double derivative(double, double y) const override { return 1.0 - y * y; }
};

}  // namespace

nlohmann::json Layer::describe() const { return {{"kind", kind()}}; }

std::unique_ptr<Layer> make_dense(int outputs) { return std::make_unique<Dense>(outputs); }
std::unique_ptr<Layer> make_reshape(TensorShape shape) { return std::make_unique<Reshape>(shape); }
std::unique_ptr<Layer> make_conv_transpose(int out_channels) {
  return std::make_unique<ConvTranspose>(out_channels);
}
std::unique_ptr<Layer> make_conv(int out_channels) { return std::make_unique<Conv>(out_channels); }
std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }
std::unique_ptr<Layer> make_leaky_relu(double slope) { return std::make_unique<LeakyRelu>(slope); }
std::unique_ptr<Layer> make_tanh() { return std::make_unique<Tanh>(); }

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& d) {
  try {
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "dense") return make_dense(d.at("outputs").get<int>());
    if (kind == "reshape") {
      return make_reshape(
          {d.at("height").get<int>(), d.at("width").get<int>(), d.at("channels").get<int>()});
    }
    if (kind == "conv_transpose") return make_conv_transpose(d.at("out_channels").get<int>());
    if (kind == "conv") return make_conv(d.at("out_channels").get<int>());
    if (kind == "relu") return make_relu();
    if (kind == "leaky_relu") return make_leaky_relu(d.at("slope").get<double>());
    if (kind == "tanh") return make_tanh();
    throw FormatError("unknown layer kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed layer description: ") + e.what());
  }
}

Network::Network(TensorShape input, std::vector<std::unique_ptr<Layer>> layers)
    : input_(input), layers_(std::move(layers)) {
  shapes_.push_back(input_);
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    offsets_.push_back(total);
    total += layer->param_count(shapes_.back());
    shapes_.push_back(layer->output_shape(shapes_.back()));
  }
  offsets_.push_back(total);
  params_.assign(total, 0.0);
}

void Network::initialize(Rng& rng) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->initialize(std::span(params_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]),
                           shapes_[i], rng);
  }
}

Network::Tape Network::forward(Tensor input) const {
  if (input.shape != input_) throw ShapeError("network input has the wrong shape");
  Tape tape;
  tape.activations.reserve(layers_.size() + 1);
  tape.activations.push_back(std::move(input));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Tensor out(shapes_[i + 1]);
    layers_[i]->forward(tape.activations.back(), out,
                        std::span<const double>(params_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]));
    tape.activations.push_back(std::move(out));
  }
  return tape;
}

Tensor Network::backward(const Tape& tape, const Tensor& grad_output, std::span<double> param_grad) const {
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw ShapeError("parameter gradient buffer has the wrong size");
  }
  Tensor grad = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Tensor grad_in(shapes_[i]);
    const auto slice = [&](auto span) {
      return span.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
    };
    layers_[i]->backward(tape.activations[i], tape.activations[i + 1], grad, &grad_in,
                         slice(std::span<const double>(params_)),
                         param_grad.empty() ? std::span<double>{} : slice(param_grad));
    grad = std::move(grad_in);
  }
  return grad;
}

nlohmann::json Network::describe() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) layers.push_back(layer->describe());
  return {{"input", {input_.height, input_.width, input_.channels}}, {"layers", layers}};
}

Network Network::from_description(const nlohmann::json& description) {
  try {
    const auto& in = description.at("input");
    TensorShape input{in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
    std::vector<std::unique_ptr<Layer>> layers;
    for (const auto& d : description.at("layers")) layers.push_back(layer_from_json(d));
    return Network(input, std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed network description: ") + e.what());
  }
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_(size, 0.0),
      second_(size, 0.0) {}

void Adam::step(std::span<double> values, std::span<const double> gradient) {
  if (values.size() != first_.size() || gradient.size() != first_.size()) {
    throw ShapeError("Adam step size mismatch");
  }
  ++step_count_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < values.size(); ++i) {
    first_[i] = beta1_ * first_[i] + (1.0 - beta1_) * gradient[i];
    second_[i] = beta2_ * second_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    const double m = first_[i] / correction1;
    const double v = second_[i] / correction2;
    values[i] -= learning_rate_ * m / (std::sqrt(v) + epsilon_);
  }
}

void Adam::reset() {
  step_count_ = 0;
  std::fill(first_.begin(), first_.end(), 0.0);
  std::fill(second_.begin(), second_.end(), 0.0);
}

}  // namespace cardan::nn
