#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fsts/adam.hpp"
#include "fsts/kernels.hpp"
#include "fsts/rng.hpp"
#include "fsts/tensor.hpp"
#include "support/gradcheck.hpp"

using namespace fsts;
using testsupport::finite_diff_max_err;

namespace {

TensorT<double> random_tensor(std::vector<int64_t> shape, Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
  TensorT<double> t(std::move(shape));
  for (auto& v : t.values) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3}, 1.0f);
  CHECK(t.size() == 6);
  CHECK(t.extent(1) == 3);
  CHECK_FALSE(t.has_grad());
  t.ensure_grad();
  CHECK(t.has_grad());
  CHECK(t.grad.size() == 6);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f}), ShapeError);
}

TEST_CASE("conv1d scaling filter") {
  Tensor input({3, 1}, {1, 2, 3});
  Tensor filters({1, 1, 1}, {2});
  Tensor bias({1}, {0});
  const Tensor out = nn::conv1d_forward(input, filters, bias);
  CHECK(out.values == std::vector<float>{2, 4, 6});
}

TEST_CASE("conv1d zero padding, k=3 box filter") {
  Tensor input({4, 1}, {1, 0, 0, 0});
  Tensor filters({3, 1, 1}, {1, 1, 1});
  Tensor bias({1}, {0});
  const Tensor out = nn::conv1d_forward(input, filters, bias);
  CHECK(out.values == std::vector<float>{1, 1, 0, 0});
}

TEST_CASE("conv1d channel mismatch names both shapes") {
  Tensor input({4, 2}, 0.0f);
  Tensor filters({3, 3, 1}, 0.0f);
  Tensor bias({1}, 0.0f);
  CHECK_THROWS_WITH_AS(nn::conv1d_forward(input, filters, bias),
                       doctest::Contains("[4,2]"), ShapeError);
}

TEST_CASE("conv1d same padding preserves time extent for any k <= time") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int64_t t = 1 + static_cast<int64_t>(rng.below(20));
    const int64_t k = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(t)));
    const int64_t c = 1 + static_cast<int64_t>(rng.below(3));
    Tensor input({t, c}, 0.5f);
    Tensor filters({k, c, 2}, 0.1f);
    Tensor bias({2}, 0.0f);
    const Tensor out = nn::conv1d_forward(input, filters, bias);
    CHECK(out.shape[0] == t);
  }
  Tensor input({3, 1}, 0.0f);
  CHECK_THROWS_AS(nn::conv1d_forward(input, Tensor({4, 1, 1}, 0.0f), Tensor({1}, 0.0f)),
                  ShapeError);
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng rng(11);
  auto input = random_tensor({5, 2}, rng);
  auto filters = random_tensor({3, 2, 4}, rng);
  auto bias = random_tensor({4}, rng);
  auto weight = random_tensor({5, 4}, rng);  // fixed projection to a scalar loss

  auto loss = [&] {
    const auto out = nn::conv1d_forward(input, filters, bias);
    double acc = 0;
    for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * weight.values[i];
    return acc;
  };

  const auto out = nn::conv1d_forward(input, filters, bias);
  const auto grads = nn::conv1d_backward(weight, input, filters);

  CHECK(finite_diff_max_err(input, grads.input.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(filters, grads.filters.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(bias, grads.bias.values, loss) < 1e-6);
  CHECK(out.shape == std::vector<int64_t>{5, 4});
}

TEST_CASE("conv1d backward on zero upstream gradient") {
  Rng rng(3);
  auto input = random_tensor({6, 2}, rng);
  auto filters = random_tensor({3, 2, 2}, rng);
  TensorT<double> zero({6, 2}, 0.0);
  const auto grads = nn::conv1d_backward(zero, input, filters);
  for (double g : grads.input.values) CHECK(g == 0.0);
  for (double g : grads.filters.values) CHECK(g == 0.0);
  for (double g : grads.bias.values) CHECK(g == 0.0);
}

TEST_CASE("conv1d backward requires the cached input") {
  TensorT<double> empty;
  TensorT<double> gy({3, 1}, 0.0);
  TensorT<double> f({1, 1, 1}, {2.0});
  CHECK_THROWS_AS(nn::conv1d_backward(gy, empty, f), ShapeError);
}

TEST_CASE("batchnorm leaves standardized input nearly unchanged") {
  // Two channels, 8 timesteps, already zero-mean unit-variance per channel.
  Tensor x({8, 2});
  const float vals[8] = {1, -1, 1, -1, 1, -1, 1, -1};
  for (int64_t t = 0; t < 8; ++t) {
    x.values[static_cast<size_t>(t * 2)] = vals[t];
    x.values[static_cast<size_t>(t * 2 + 1)] = -vals[t];
  }
  Tensor gamma({2}, 1.0f), beta({2}, 0.0f), rm({2}, 0.0f), rv({2}, 1.0f);
  const Tensor out = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9f,
                                             1e-5f);
  for (int64_t i = 0; i < out.size(); ++i) {
    CHECK(std::abs(out.values[i] - x.values[i]) < 1e-4f);
  }
}

TEST_CASE("batchnorm constant channel collapses to beta") {
  Tensor x({10, 1}, 3.25f);
  Tensor gamma({1}, 2.0f), beta({1}, 0.75f), rm({1}, 0.0f), rv({1}, 1.0f);
  const Tensor out = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9f,
                                             1e-5f);
  for (float v : out.values) CHECK(v == doctest::Approx(0.75f));
}

TEST_CASE("batchnorm inference is stateless and repeatable") {
  Rng rng(5);
  Tensor x({6, 3});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform(-2, 2));
  Tensor gamma({3}, 1.5f), beta({3}, -0.25f), rm({3}, 0.1f), rv({3}, 0.8f);
  const Tensor a = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::infer, 0.9f, 1e-5f);
  const Tensor b = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::infer, 0.9f, 1e-5f);
  CHECK(a.values == b.values);
  CHECK(rm.values == std::vector<float>{0.1f, 0.1f, 0.1f});
  const Tensor c = nn::batchnorm1d_infer(x, gamma, beta, rm, rv, 1e-5f);
  CHECK(a.values == c.values);
}

TEST_CASE("batchnorm gradients match finite differences") {
  Rng rng(17);
  auto x = random_tensor({2, 5, 3}, rng);
  auto gamma = random_tensor({3}, rng, 0.5, 1.5);
  auto beta = random_tensor({3}, rng);
  auto weight = random_tensor({2, 5, 3}, rng);

  auto loss = [&] {
    TensorT<double> rm({3}, 0.0), rv({3}, 1.0);
    const auto out = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9, 1e-5);
    double acc = 0;
    for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * weight.values[i];
    return acc;
  };

  TensorT<double> rm({3}, 0.0), rv({3}, 1.0);
  nn::BatchNormCache<double> cache;
  nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9, 1e-5, &cache);
  const auto grads = nn::batchnorm1d_backward(weight, cache, gamma);

  CHECK(finite_diff_max_err(x, grads.input.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(gamma, grads.gamma.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(beta, grads.beta.values, loss) < 1e-6);
}

TEST_CASE("maxpool hand example and shape arithmetic") {
  Tensor x({6, 1}, {1, 3, 2, 5, 4, 6});
  const Tensor out = nn::maxpool1d_forward(x, 3);
  CHECK(out.values == std::vector<float>{3, 6});

  Tensor long_x({187, 2}, 0.0f);
  CHECK(nn::maxpool1d_forward(long_x, 3).shape[0] == 62);
  CHECK_THROWS_AS(nn::maxpool1d_forward(long_x, 200), ShapeError);
}

TEST_CASE("maxpool output extent is floor(time/size)") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int64_t t = 1 + static_cast<int64_t>(rng.below(50));
    const int64_t s = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(t)));
    Tensor x({t, 1}, 0.0f);
    CHECK(nn::maxpool1d_forward(x, s).shape[0] == t / s);
  }
}

TEST_CASE("maxpool backward routes gradient to the argmax") {
  Tensor x({6, 1}, {1, 3, 2, 5, 4, 6});
  nn::MaxPoolCache cache;
  nn::maxpool1d_forward(x, 3, &cache);
  Tensor gy({2, 1}, {10, 20});
  const Tensor gx = nn::maxpool1d_backward<float>(gy, cache);
  CHECK(gx.values == std::vector<float>{0, 10, 0, 0, 0, 20});
}

TEST_CASE("dropout identity cases are bitwise") {
  Rng rng(29);
  Tensor x({100});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform(-5, 5));
  CHECK(nn::dropout_forward(x, 0.0, Mode::train, 42).values == x.values);
  CHECK(nn::dropout_forward(x, 0.5, Mode::infer, 42).values == x.values);
  CHECK_THROWS_AS(nn::dropout_forward(x, 1.0, Mode::train, 42), ConfigError);
}

TEST_CASE("dropout survival fraction concentrates at 1 - rate") {
  Tensor x({100000}, 1.0f);
  const Tensor out = nn::dropout_forward(x, 0.5, Mode::train, 1234);
  int64_t survivors = 0;
  for (float v : out.values) {
    if (v != 0.0f) {
      ++survivors;
      CHECK(v == 2.0f);  // inverted scaling by 1/(1-rate)
    }
  }
  const double fraction = static_cast<double>(survivors) / 1e5;
  CHECK(fraction > 0.49);
  CHECK(fraction < 0.51);
}

TEST_CASE("inverted dropout preserves expectation") {
  const double rate = 0.3;
  Tensor x({8}, {0.5f, -1.0f, 2.0f, 3.5f, -0.25f, 1.25f, -2.0f, 0.75f});
  std::vector<double> mean(8, 0.0);
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    const Tensor out = nn::dropout_forward(x, rate, Mode::train,
                                           hash_seed(777, "trial", static_cast<uint64_t>(s)));
    for (int i = 0; i < 8; ++i) mean[static_cast<size_t>(i)] += out.values[i];
  }
  for (int i = 0; i < 8; ++i) {
    mean[static_cast<size_t>(i)] /= trials;
    CHECK(std::abs(mean[static_cast<size_t>(i)] - x.values[i]) <
          0.02 * std::abs(x.values[i]) + 1e-3);
  }
}

TEST_CASE("dropout mask is schedule-independent and seed-sensitive") {
  Tensor x({512}, 1.0f);
  const Tensor a = nn::dropout_forward(x, 0.4, Mode::train, 99);
  const Tensor b = nn::dropout_forward(x, 0.4, Mode::train, 99);
  const Tensor c = nn::dropout_forward(x, 0.4, Mode::train, 100);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("sigmoid, relu, abs_diff basics") {
  Tensor x({3}, {0.0f, 5.0f, -5.0f});
  const Tensor s = nn::sigmoid_forward(x);
  CHECK(s.values[0] == 0.5f);
  CHECK(s.values[1] > 0.99f);
  CHECK(s.values[2] < 0.01f);

  Tensor r = nn::relu_forward(Tensor({4}, {-1.0f, 0.0f, 2.0f, -3.0f}));
  CHECK(r.values == std::vector<float>{0, 0, 2, 0});

  Rng rng(31);
  Tensor a({64}), b({64});
  for (auto& v : a.values) v = static_cast<float>(rng.uniform(-3, 3));
  for (auto& v : b.values) v = static_cast<float>(rng.uniform(-3, 3));
  const Tensor ab = nn::abs_diff_forward(a, b);
  const Tensor ba = nn::abs_diff_forward(b, a);
  CHECK(ab.values == ba.values);  // IEEE negation is exact
  CHECK_THROWS_AS(nn::abs_diff_forward(a, Tensor({63}, 0.0f)), ShapeError);
}

TEST_CASE("relu derivative at zero is zero") {
  TensorT<double> x({3}, {-1.0, 0.0, 1.0});
  TensorT<double> gy({3}, {5.0, 5.0, 5.0});
  const auto gx = nn::relu_backward(gy, x);
  CHECK(gx.values == std::vector<double>{0.0, 0.0, 5.0});
}

TEST_CASE("dense gradients match finite differences") {
  Rng rng(37);
  auto x = random_tensor({4, 6}, rng);
  auto w = random_tensor({6, 3}, rng);
  auto b = random_tensor({3}, rng);
  auto weight = random_tensor({4, 3}, rng);

  auto loss = [&] {
    const auto out = nn::dense_forward(x, w, b);
    double acc = 0;
    for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * weight.values[i];
    return acc;
  };
  const auto grads = nn::dense_backward(weight, x, w);
  CHECK(finite_diff_max_err(x, grads.input.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(w, grads.weights.values, loss) < 1e-6);
  CHECK(finite_diff_max_err(b, grads.bias.values, loss) < 1e-6);
}

TEST_CASE("sigmoid and abs_diff gradients match finite differences") {
  Rng rng(41);
  auto x = random_tensor({10}, rng);
  auto weight = random_tensor({10}, rng);
  auto loss_sig = [&] {
    const auto out = nn::sigmoid_forward(x);
    double acc = 0;
    for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * weight.values[i];
    return acc;
  };
  const auto s = nn::sigmoid_forward(x);
  const auto gx = nn::sigmoid_backward(weight, s);
  CHECK(finite_diff_max_err(x, gx.values, loss_sig) < 1e-6);

  auto a = random_tensor({10}, rng);
  auto b = random_tensor({10}, rng);
  auto loss_abs = [&] {
    const auto out = nn::abs_diff_forward(a, b);
    double acc = 0;
    for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * weight.values[i];
    return acc;
  };
  const auto [ga, gb] = nn::abs_diff_backward(weight, a, b);
  CHECK(finite_diff_max_err(a, ga.values, loss_abs) < 1e-6);
  CHECK(finite_diff_max_err(b, gb.values, loss_abs) < 1e-6);
}

TEST_CASE("bce examples") {
  TensorT<double> p1({1}, {0.5});
  TensorT<double> y1({1}, {1.0});
  CHECK(nn::bce_loss(p1, y1) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  TensorT<double> p2({1}, {1.0 - 1e-7});
  CHECK(nn::bce_loss(p2, y1) == doctest::Approx(1e-7).epsilon(1e-2));
  TensorT<double> p_over({1}, {1.0});  // clamped down to 1 - 1e-7
  CHECK(nn::bce_loss(p_over, y1) == doctest::Approx(1e-7).epsilon(1e-2));

  // Two samples whose individual losses are 0.2 and 0.4 average to 0.3.
  const double pa = std::exp(-0.2), pb = std::exp(-0.4);
  TensorT<double> p3({2}, {pa, pb});
  TensorT<double> y3({2}, {1.0, 1.0});
  CHECK(nn::bce_loss(p3, y3) == doctest::Approx(0.3).epsilon(1e-9));

  TensorT<double> bad({1}, {0.5});
  CHECK_THROWS_AS(nn::bce_loss(p1, bad), Error);
}

TEST_CASE("bce gradient matches finite differences") {
  Rng rng(43);
  TensorT<double> p({6});
  TensorT<double> y({6});
  for (int i = 0; i < 6; ++i) {
    p.values[static_cast<size_t>(i)] = rng.uniform(0.1, 0.9);
    y.values[static_cast<size_t>(i)] = i % 2 == 0 ? 1.0 : 0.0;
  }
  auto loss = [&] { return nn::bce_loss(p, y); };
  const auto grad = nn::bce_backward(p, y);
  CHECK(finite_diff_max_err(p, grad.values, loss) < 1e-6);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  TensorT<float> p({3}, {1.0f, -2.0f, 0.5f});
  p.ensure_grad();
  std::vector<NamedTensor> params{{"p", &p}};
  AdamState st = AdamState::init(params);
  adam_step(params, st);
  CHECK(p.values == std::vector<float>{1.0f, -2.0f, 0.5f});
  CHECK(st.step == 1);
}

TEST_CASE("adam: first step with unit gradient moves by about lr") {
  TensorT<double> p({1}, {1.0});
  p.ensure_grad();
  p.grad[0] = 1.0;
  std::vector<NamedTensorT<double>> params{{"p", &p}};
  auto st = AdamStateT<double>::init(params);
  adam_step(params, st);
  // m_hat = 1, v_hat = 1 after bias correction: step = lr / (1 + eps).
  CHECK(p.values[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  CHECK(p.grad[0] == 1.0);  // grads untouched
}

TEST_CASE("adam is stateful: two steps differ from one doubled step") {
  auto run = [](int steps, double lr) {
    TensorT<double> p({1}, {1.0});
    p.ensure_grad();
    std::vector<NamedTensorT<double>> params{{"p", &p}};
    auto st = AdamStateT<double>::init(params, lr);
    for (int s = 0; s < steps; ++s) {
      p.grad[0] = 2.0 * p.values[0];  // gradient of x^2
      adam_step(params, st);
    }
    return p.values[0];
  };
  CHECK(run(2, 1e-3) != run(1, 2e-3));
}

TEST_CASE("adam refuses parameters without gradients, naming them") {
  TensorT<float> p({2}, 1.0f);
  std::vector<NamedTensor> params{{"block0.filters", &p}};
  AdamState st = AdamState::init(params);
  CHECK_THROWS_WITH_AS(adam_step(params, st), doctest::Contains("block0.filters"), Error);
}

TEST_CASE("adam validates hyperparameters") {
  std::vector<NamedTensor> params;
  CHECK_THROWS_AS(AdamState::init(params, 1e-3f, 1.0f), ConfigError);
  CHECK_THROWS_AS(AdamState::init(params, -1e-3f), ConfigError);
}

TEST_CASE("inference-mode ops are pure") {
  Rng rng(47);
  Tensor x({32, 4});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform(-1, 1));
  Tensor f({5, 4, 4});
  for (auto& v : f.values) v = static_cast<float>(rng.uniform(-1, 1));
  Tensor b({4}, 0.1f);
  const Tensor y1 = nn::conv1d_forward(x, f, b);
  const Tensor y2 = nn::conv1d_forward(x, f, b);
  CHECK(y1.values == y2.values);
  const Tensor r1 = nn::relu_forward(y1);
  const Tensor r2 = nn::relu_forward(y1);
  CHECK(r1.values == r2.values);
}
