#include <doctest.h>

#include <cmath>
#include <functional>

#include "cardan/error.hpp"
#include "cardan/nn.hpp"
#include "cardan/rng.hpp"

using namespace cardan;
using namespace cardan::nn;

namespace {

Tensor random_tensor(Rng& rng, TensorShape shape) {
  Tensor t(shape);
  for (auto& v : t.data) v = rng.normal();
  return t;
}

std::vector<double> random_params(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (auto& v : p) v = rng.normal(0.0, 0.5);
  return p;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Textbook 4x4 / stride 2 / padding 1 kernels, weights [ky][kx][cin][cout] then bias.
Tensor reference_conv(const Tensor& in, const std::vector<double>& p, int cout) {
  const int h = in.shape.height, w = in.shape.width, cin = in.shape.channels;
  Tensor out({h / 2, w / 2, cout});
  const double* bias = p.data() + 16 * cin * cout;
  for (int oy = 0; oy < h / 2; ++oy)
    for (int ox = 0; ox < w / 2; ++ox)
      for (int co = 0; co < cout; ++co) {
        double acc = bias[co];
        for (int ky = 0; ky < 4; ++ky)
          for (int kx = 0; kx < 4; ++kx) {
            const int iy = 2 * oy - 1 + ky, ix = 2 * ox - 1 + kx;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ci = 0; ci < cin; ++ci)
              acc += in.data[static_cast<std::size_t>((iy * w + ix) * cin + ci)] *
                     p[static_cast<std::size_t>(((ky * 4 + kx) * cin + ci) * cout + co)];
          }
        out.data[static_cast<std::size_t>((oy * (w / 2) + ox) * cout + co)] = acc;
      }
  return out;
}

Tensor reference_conv_transpose(const Tensor& in, const std::vector<double>& p, int cout) {
  const int h = in.shape.height, w = in.shape.width, cin = in.shape.channels;
  Tensor out({2 * h, 2 * w, cout});
  const double* bias = p.data() + 16 * cin * cout;
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = bias[k % static_cast<std::size_t>(cout)];
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      for (int ky = 0; ky < 4; ++ky)
        for (int kx = 0; kx < 4; ++kx) {
          const int oy = 2 * iy - 1 + ky, ox = 2 * ix - 1 + kx;
          if (oy < 0 || oy >= 2 * h || ox < 0 || ox >= 2 * w) continue;
          for (int ci = 0; ci < cin; ++ci)
            for (int co = 0; co < cout; ++co)
              out.data[static_cast<std::size_t>((oy * 2 * w + ox) * cout + co)] +=
                  in.data[static_cast<std::size_t>((iy * w + ix) * cin + ci)] *
                  p[static_cast<std::size_t>(((ky * 4 + kx) * cin + ci) * cout + co)];
        }
  return out;
}

// Checks a layer's backward pass against central differences of the scalar
// <forward(x), g> for a random cotangent g.
void check_layer_gradients(const Layer& layer, TensorShape in_shape, Rng& rng, double tol = 1e-6) {
  const auto out_shape = layer.output_shape(in_shape);
  auto params = random_params(rng, layer.param_count(in_shape));
  Tensor x = random_tensor(rng, in_shape);
  const Tensor g = random_tensor(rng, out_shape);

  auto objective = [&](const Tensor& input, const std::vector<double>& p) {
    Tensor out(out_shape);
    layer.forward(input, out, p);
    return dot(out.data, g.data);
  };

  Tensor out(out_shape);
  layer.forward(x, out, params);
  Tensor grad_in(in_shape);
  std::vector<double> grad_p(params.size());
  layer.backward(x, out, g, &grad_in, params, grad_p);

  const double h = 1e-6;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    const double fd = (objective(xp, params) - objective(xm, params)) / (2 * h);
    REQUIRE(grad_in.data[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto pp = params, pm = params;
    pp[i] += h;
    pm[i] -= h;
    const double fd = (objective(x, pp) - objective(x, pm)) / (2 * h);
    REQUIRE(grad_p[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
}

}  // namespace

TEST_CASE("layer shapes and parameter counts") {
  CHECK(make_dense(7)->output_shape({1, 1, 5}) == TensorShape{1, 1, 7});
  CHECK(make_dense(7)->param_count({1, 1, 5}) == 42);
  CHECK(make_conv_transpose(3)->output_shape({4, 4, 8}) == TensorShape{8, 8, 3});
  CHECK(make_conv_transpose(3)->param_count({4, 4, 8}) == 16 * 8 * 3 + 3);
  CHECK(make_conv(6)->output_shape({8, 8, 3}) == TensorShape{4, 4, 6});
  CHECK(make_reshape({2, 2, 3})->output_shape({1, 1, 12}) == TensorShape{2, 2, 3});
}

TEST_CASE("strided kernels match the textbook definition") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const TensorShape in{4, 6, 3};
    const Tensor x = random_tensor(rng, in);

    const auto deconv = make_conv_transpose(2);
    const auto pd = random_params(rng, deconv->param_count(in));
    Tensor out_d(deconv->output_shape(in));
    deconv->forward(x, out_d, pd);
    const auto ref_d = reference_conv_transpose(x, pd, 2);
    for (std::size_t i = 0; i < out_d.data.size(); ++i) REQUIRE(out_d.data[i] == doctest::Approx(ref_d.data[i]));

    const auto conv = make_conv(5);
    const auto pc = random_params(rng, conv->param_count(in));
    Tensor out_c(conv->output_shape(in));
    conv->forward(x, out_c, pc);
    const auto ref_c = reference_conv(x, pc, 5);
    for (std::size_t i = 0; i < out_c.data.size(); ++i) REQUIRE(out_c.data[i] == doctest::Approx(ref_c.data[i]));
  }
}

TEST_CASE("layer gradients match central differences") {
  Rng rng(4);
  check_layer_gradients(*make_dense(4), {1, 1, 6}, rng);
  check_layer_gradients(*make_dense(3), {2, 2, 2}, rng);
  check_layer_gradients(*make_conv_transpose(3), {2, 3, 2}, rng);
  check_layer_gradients(*make_conv(3), {4, 6, 2}, rng);
  check_layer_gradients(*make_tanh(), {2, 2, 3}, rng);
  check_layer_gradients(*make_reshape({1, 1, 12}), {2, 2, 3}, rng);
  // Piecewise-linear activations: random normal inputs keep clear of the kink.
  check_layer_gradients(*make_relu(), {3, 3, 2}, rng);
  check_layer_gradients(*make_leaky_relu(0.2), {3, 3, 2}, rng);
}

TEST_CASE("network backward matches central differences") {
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(make_dense(2 * 2 * 4));
  layers.push_back(make_reshape({2, 2, 4}));
  layers.push_back(make_leaky_relu(0.1));
  layers.push_back(make_conv_transpose(2));
  layers.push_back(make_tanh());
  layers.push_back(make_conv(3));
  Network net({1, 1, 3}, std::move(layers));
  Rng rng(9);
  net.initialize(rng);
  CHECK(net.output_shape() == TensorShape{2, 2, 3});

  Tensor x = random_tensor(rng, {1, 1, 3});
  const Tensor g = random_tensor(rng, net.output_shape());
  auto f = [&](const Tensor& input) { return dot(net.forward(input).output().data, g.data); };

  std::vector<double> grad_p(net.param_count());
  const auto tape = net.forward(x);
  const Tensor grad_x = net.backward(tape, g, grad_p);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    CHECK(grad_x.data[i] == doctest::Approx((f(xp) - f(xm)) / (2 * h)).epsilon(1e-6));
  }
  for (std::size_t i = 0; i < net.param_count(); i += 7) {
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    const double fp = f(x);
    net.params()[i] = saved - h;
    const double fm = f(x);
    net.params()[i] = saved;
    CHECK(grad_p[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("description round-trip rebuilds the same network") {
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(make_dense(8));
  layers.push_back(make_reshape({2, 2, 2}));
  layers.push_back(make_relu());
  layers.push_back(make_conv_transpose(1));
  layers.push_back(make_leaky_relu(0.3));
  Network net({1, 1, 4}, std::move(layers));
  Rng rng(1);
  net.initialize(rng);
  auto copy = Network::from_description(net.describe());
  CHECK(copy.param_count() == net.param_count());
  CHECK(copy.describe() == net.describe());
  std::copy(net.params().begin(), net.params().end(), copy.params().begin());
  const Tensor x = random_tensor(rng, {1, 1, 4});
  CHECK(copy.forward(x).output().data == net.forward(x).output().data);
}

TEST_CASE("adam first step moves each coordinate by the learning rate") {
  Adam adam(3, 0.01);
  std::vector<double> v{0.0, 1.0, -2.0};
  const std::vector<double> g{3.0, -0.5, 1e-3};
  adam.step(v, g);
  CHECK(v[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(v[1] == doctest::Approx(1.01).epsilon(1e-6));
  CHECK(v[2] == doctest::Approx(-2.01).epsilon(1e-4));
}

TEST_CASE("network rejects wrong input shapes") {
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(make_dense(2));
  Network net({1, 1, 3}, std::move(layers));
  CHECK_THROWS_AS(net.forward(Tensor({1, 1, 4})), ShapeError);
}
