#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardan/rng.hpp"

namespace cardan::nn {

/// Height x width x channels, channels innermost (same layout as Image).
struct TensorShape {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const TensorShape&) const = default;
};

struct Tensor {
  TensorShape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(TensorShape s, double fill = 0.0) : shape(s), data(s.size(), fill) {}
};

/// Stateless layer; parameters live in the owning network's flat vector.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual nlohmann::json describe() const;
  virtual TensorShape output_shape(TensorShape input) const = 0;
  virtual std::size_t param_count(TensorShape /*input*/) const { return 0; }
  virtual void initialize(std::span<double> /*params*/, TensorShape /*input*/, Rng& /*rng*/) const {}

  virtual void forward(const Tensor& input, Tensor& output, std::span<const double> params) const = 0;
  /// Adds d(loss)/d(params) into `param_grad` when it is non-empty and writes
  /// d(loss)/d(input) into `grad_input` when it is non-null.
  virtual void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                        Tensor* grad_input, std::span<const double> params,
                        std::span<double> param_grad) const = 0;
};

std::unique_ptr<Layer> make_dense(int outputs);
std::unique_ptr<Layer> make_reshape(TensorShape shape);
/// 4x4 kernel, stride 2, padding 1: doubles height and width.
std::unique_ptr<Layer> make_conv_transpose(int out_channels);
/// 4x4 kernel, stride 2, padding 1: halves height and width.
std::unique_ptr<Layer> make_conv(int out_channels);
std::unique_ptr<Layer> make_relu();
std::unique_ptr<Layer> make_leaky_relu(double slope);
std::unique_ptr<Layer> make_tanh();

/// Rebuilds a layer from `Layer::describe()` output.
std::unique_ptr<Layer> layer_from_json(const nlohmann::json& description);

/// Feed-forward chain of layers with one flat parameter vector.
class Network {
 public:
  Network(TensorShape input, std::vector<std::unique_ptr<Layer>> layers);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  TensorShape input_shape() const noexcept { return input_; }
  TensorShape output_shape() const noexcept { return shapes_.back(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }

  void initialize(Rng& rng);

  /// All intermediate activations; front() is the input, back() the output.
  struct Tape {
    std::vector<Tensor> activations;
    const Tensor& output() const { return activations.back(); }
  };
  Tape forward(Tensor input) const;
  /// Returns d(loss)/d(input); accumulates parameter gradients into
  /// `param_grad` when it is non-empty (must then have param_count() entries).
  Tensor backward(const Tape& tape, const Tensor& grad_output, std::span<double> param_grad = {}) const;

  nlohmann::json describe() const;
  static Network from_description(const nlohmann::json& description);

 private:
  TensorShape input_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<TensorShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Adaptive-moment optimizer over a flat vector.
class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(std::span<double> values, std::span<const double> gradient);
  void reset();

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long step_count_ = 0;
  std::vector<double> first_;
  std::vector<double> second_;
};

}  // namespace cardan::nn
