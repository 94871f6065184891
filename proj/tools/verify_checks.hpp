#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsts/baselines.hpp"
#include "fsts/kernels.hpp"
#include "fsts/model.hpp"
#include "fsts/pairs.hpp"
#include "fsts/rng.hpp"

// Self-contained integrity checks behind the `verify` subcommand: gradient
// checks against central finite differences, DTW against a memoized naive
// recursion, and pair-generation balance. Each check reports its largest
// observed error so regressions are visible before they flip a threshold.

namespace verify_checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  std::string detail;
};

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

inline double central_diff_err(fsts::TensorT<double>& x, const std::vector<double>& analytic,
                               const std::function<double()>& loss) {
  const double step = 1e-5;
  double worst = 0;
  for (size_t i = 0; i < x.values.size(); ++i) {
    const double orig = x.values[i];
    x.values[i] = orig + step;
    const double up = loss();
    x.values[i] = orig - step;
    const double dn = loss();
    x.values[i] = orig;
    worst = std::max(worst, rel_err(analytic[i], (up - dn) / (2 * step)));
  }
  return worst;
}

inline fsts::TensorT<double> random_tensor(std::vector<int64_t> shape, fsts::Rng& rng) {
  fsts::TensorT<double> t(std::move(shape));
  for (auto& v : t.values) v = rng.uniform(-1, 1);
  return t;
}

inline CheckResult check_op_gradients() {
  using namespace fsts;
  Rng rng(2001);
  double worst = 0;

  {  // conv1d
    auto x = random_tensor({6, 2}, rng);
    auto f = random_tensor({3, 2, 4}, rng);
    auto b = random_tensor({4}, rng);
    auto w = random_tensor({6, 4}, rng);
    auto loss = [&] {
      const auto out = nn::conv1d_forward(x, f, b);
      double acc = 0;
      for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * w.values[i];
      return acc;
    };
    const auto g = nn::conv1d_backward(w, x, f);
    worst = std::max(worst, central_diff_err(x, g.input.values, loss));
    worst = std::max(worst, central_diff_err(f, g.filters.values, loss));
    worst = std::max(worst, central_diff_err(b, g.bias.values, loss));
  }
  {  // dense
    auto x = random_tensor({4, 5}, rng);
    auto wgt = random_tensor({5, 3}, rng);
    auto b = random_tensor({3}, rng);
    auto w = random_tensor({4, 3}, rng);
    auto loss = [&] {
      const auto out = nn::dense_forward(x, wgt, b);
      double acc = 0;
      for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * w.values[i];
      return acc;
    };
    const auto g = nn::dense_backward(w, x, wgt);
    worst = std::max(worst, central_diff_err(x, g.input.values, loss));
    worst = std::max(worst, central_diff_err(wgt, g.weights.values, loss));
    worst = std::max(worst, central_diff_err(b, g.bias.values, loss));
  }
  {  // batch norm (train mode)
    auto x = random_tensor({2, 6, 3}, rng);
    auto gamma = random_tensor({3}, rng);
    auto beta = random_tensor({3}, rng);
    auto w = random_tensor({2, 6, 3}, rng);
    auto loss = [&] {
      TensorT<double> rm({3}, 0.0), rv({3}, 1.0);
      const auto out = nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9, 1e-5);
      double acc = 0;
      for (int64_t i = 0; i < out.size(); ++i) acc += out.values[i] * w.values[i];
      return acc;
    };
    TensorT<double> rm({3}, 0.0), rv({3}, 1.0);
    nn::BatchNormCache<double> cache;
    nn::batchnorm1d_forward(x, gamma, beta, rm, rv, Mode::train, 0.9, 1e-5, &cache);
    const auto g = nn::batchnorm1d_backward(w, cache, gamma);
    worst = std::max(worst, central_diff_err(x, g.input.values, loss));
    worst = std::max(worst, central_diff_err(gamma, g.gamma.values, loss));
    worst = std::max(worst, central_diff_err(beta, g.beta.values, loss));
  }
  {  // sigmoid + abs_diff + bce composite
    auto a = random_tensor({8}, rng);
    auto b = random_tensor({8}, rng);
    fsts::TensorT<double> wgt = random_tensor({8, 1}, rng);
    fsts::TensorT<double> bias = random_tensor({1}, rng);
    fsts::TensorT<double> y({1}, {1.0});
    auto loss = [&] {
      const auto d = nn::abs_diff_forward(a, b);
      const auto z = nn::dense_forward(d, wgt, bias);
      const auto s = nn::sigmoid_forward(z);
      return static_cast<double>(nn::bce_loss(s, y));
    };
    const auto d = nn::abs_diff_forward(a, b);
    const auto z = nn::dense_forward(d, wgt, bias);
    const auto s = nn::sigmoid_forward(z);
    auto gs = nn::bce_backward(s, y);
    const auto gz = nn::sigmoid_backward(gs, s);
    const auto gd = nn::dense_backward(gz, d, wgt);
    const auto [ga, gb] = nn::abs_diff_backward(gd.input, a, b);
    worst = std::max(worst, central_diff_err(a, ga.values, loss));
    worst = std::max(worst, central_diff_err(b, gb.values, loss));
  }

  CheckResult res;
  res.name = "per-op gradient checks vs central differences";
  res.max_error = worst;
  res.passed = worst < 1e-6;
  return res;
}

inline CheckResult check_end_to_end_gradient() {
  using namespace fsts;
  EmbeddingConfig cfg;
  cfg.blocks = {{4, 3, 2}, {4, 3, 2}};
  cfg.input_length = 16;
  cfg.dropout_rate = 0.2;
  ModelParamsT<double> params = ModelParamsT<double>::init(cfg, 2002);
  Rng rng(2003);
  TensorT<double> a({2, 16}), b({2, 16});
  for (auto& v : a.values) v = rng.uniform(0, 1);
  for (auto& v : b.values) v = rng.uniform(0, 1);
  TensorT<double> y({2}, {1.0, 0.0});

  auto loss = [&] {
    ModelParamsT<double> scratch = params;
    return train_pair_batch(scratch, cfg, a, b, y, 11).loss;
  };
  params.ensure_grads();
  params.zero_grads();
  train_pair_batch(params, cfg, a, b, y, 11);
  double worst = 0;
  for (auto& nt : params.trainable()) {
    worst = std::max(worst, central_diff_err(*nt.tensor, nt.tensor->grad, loss));
  }
  CheckResult res;
  res.name = "end-to-end miniature network gradient check";
  res.max_error = worst;
  res.passed = worst < 1e-5;
  return res;
}

// Memoized naive recursion, the independent DTW route.
inline double dtw_recursive(std::span<const float> a, std::span<const float> b) {
  std::vector<double> memo(a.size() * b.size(), -1.0);
  std::function<double(size_t, size_t)> solve = [&](size_t i, size_t j) -> double {
    double& slot = memo[i * b.size() + j];
    if (slot >= 0) return slot;
    const double cost = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[j]));
    double best = 0;
    if (i > 0 || j > 0) {
      best = std::numeric_limits<double>::infinity();
      if (i > 0) best = std::min(best, solve(i - 1, j));
      if (j > 0) best = std::min(best, solve(i, j - 1));
      if (i > 0 && j > 0) best = std::min(best, solve(i - 1, j - 1));
    }
    slot = cost + best;
    return slot;
  };
  return solve(a.size() - 1, b.size() - 1);
}

// Deliberately wrong step set (no diagonal move) used to prove the check
// would catch a broken implementation.
inline double dtw_without_diagonal(std::span<const float> a, std::span<const float> b) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(b.size() + 1, inf), cur(b.size() + 1, inf);
  prev[0] = 0;
  for (size_t i = 1; i <= a.size(); ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    for (size_t j = 1; j <= b.size(); ++j) {
      const double cost = std::abs(static_cast<double>(a[i - 1]) - static_cast<double>(b[j - 1]));
      cur[j] = cost + std::min(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline CheckResult check_dtw_oracle(bool inject_fault) {
  using DtwFn = std::function<double(std::span<const float>, std::span<const float>)>;
  const DtwFn under_test =
      inject_fault ? DtwFn(dtw_without_diagonal)
                   : DtwFn([](std::span<const float> a, std::span<const float> b) {
                       return fsts::dtw_distance(a, b);
                     });

  // Exhaustive ternary series of lengths 1..4 plus random symmetry probes.
  std::vector<std::vector<float>> all;
  for (int len = 1; len <= 4; ++len) {
    size_t count = 1;
    for (int i = 0; i < len; ++i) count *= 3;
    for (size_t code = 0; code < count; ++code) {
      std::vector<float> s(static_cast<size_t>(len));
      size_t rest = code;
      for (int i = 0; i < len; ++i) {
        s[static_cast<size_t>(i)] = static_cast<float>(rest % 3);
        rest /= 3;
      }
      all.push_back(std::move(s));
    }
  }
  double worst = 0;
  for (const auto& a : all) {
    for (const auto& b : all) {
      worst = std::max(worst, std::abs(under_test(a, b) - dtw_recursive(a, b)));
    }
  }
  fsts::Rng rng(2005);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> a(1 + rng.below(15)), b(1 + rng.below(15));
    for (auto& v : a) v = static_cast<float>(rng.uniform(-2, 2));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-2, 2));
    worst = std::max(worst, std::abs(under_test(a, b) - under_test(b, a)));
    std::vector<float> same = a;
    worst = std::max(worst, std::abs(under_test(a, same)));
  }

  CheckResult res;
  res.name = "DTW equivalence with memoized naive recursion";
  res.max_error = worst;
  res.passed = worst == 0.0;
  if (inject_fault) res.detail = " (fault injected)";
  return res;
}

inline CheckResult check_pair_balance() {
  using namespace fsts;
  Rng rng(2007);
  int64_t violations = 0;
  int64_t datasets = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Dataset ds;
    ds.name = "verify";
    ds.l_max = 4;
    const int n_classes = 2 + static_cast<int>(rng.below(3));
    for (int c = 0; c < n_classes; ++c) {
      ds.label_names.push_back(std::to_string(c));
      const int members = 1 + static_cast<int>(rng.below(10));
      for (int s = 0; s < members; ++s) {
        TimeSeries ts;
        ts.values = {static_cast<float>(c), static_cast<float>(s), 0.0f, 0.0f};
        ts.original_length = 2;
        ts.label = c;
        ds.series.push_back(ts);
      }
    }
    const int64_t cap = 1 + static_cast<int64_t>(rng.below(20));
    const PairSet ps = generate_pairs(ds, cap, rng.next_u64());
    ++datasets;

    const auto members = ds.class_members();
    std::vector<int64_t> same(ds.n_classes(), 0), diff(ds.n_classes(), 0);
    for (const Pair& p : ps.pairs) {
      const int32_t la = ds.series[static_cast<size_t>(p.index_a)].label;
      const int32_t lb = ds.series[static_cast<size_t>(p.index_b)].label;
      if (p.label == 1) {
        if (la != lb || p.index_a == p.index_b) ++violations;
        ++same[static_cast<size_t>(la)];
      } else {
        if (la == lb) ++violations;
        ++diff[static_cast<size_t>(la)];
      }
    }
    for (size_t c = 0; c < ds.n_classes(); ++c) {
      const int64_t n = static_cast<int64_t>(members[c].size());
      const int64_t expected = n < 2 ? 0 : std::min(n * (n - 1) / 2, cap);
      if (same[c] != expected || diff[c] != expected) ++violations;
    }
  }
  CheckResult res;
  res.name = "pair generation balance on synthetic datasets";
  res.max_error = static_cast<double>(violations);
  res.passed = violations == 0;
  res.detail = " (" + std::to_string(datasets) + " datasets)";
  return res;
}

inline std::vector<CheckResult> run_all(bool inject_dtw_fault) {
  return {check_op_gradients(), check_end_to_end_gradient(), check_dtw_oracle(inject_dtw_fault),
          check_pair_balance()};
}

}  // namespace verify_checks
