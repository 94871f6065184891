#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fsts/errors.hpp"
#include "fsts/rng.hpp"
#include "fsts/tensor.hpp"

// Differentiable ops for the fixed Siamese architecture. Every kernel is
// parallelized over independent output elements only, with inner reductions
// in a fixed order, so results are bitwise identical for any thread count.
// Serial twins live in fsts::ref (reference.hpp).

namespace fsts {

enum class Mode { train, infer };

namespace nn {

// Layout helper: activations are [batch, time, channels]; a rank-2 tensor
// is treated as a single sample [time, channels].
struct Btc {
  int64_t b, t, c;
};

template <class T>
inline Btc btc_dims(const TensorT<T>& x, const char* who) {
  if (x.rank() == 3) return {x.shape[0], x.shape[1], x.shape[2]};
  if (x.rank() == 2) return {1, x.shape[0], x.shape[1]};
  throw ShapeError(std::string(who) + ": expected rank-2 [time,channels] or rank-3 "
                   "[batch,time,channels] input, got " +
                   TensorT<T>::shape_string(x.shape));
}

// ---------------------------------------------------------------------------
// conv1d, "same" zero padding: out[t,o] = bias[o] + sum_{j,c} in[t+j-k/2, c] * f[j,c,o]

template <class T>
TensorT<T> conv1d_forward(const TensorT<T>& input, const TensorT<T>& filters,
                          const TensorT<T>& bias) {
  const Btc d = btc_dims(input, "conv1d_forward");
  if (filters.rank() != 3) {
    throw ShapeError("conv1d_forward: filters must be [k,in_channels,out_channels], got " +
                     TensorT<T>::shape_string(filters.shape));
  }
  const int64_t k = filters.shape[0], cin = filters.shape[1], cout = filters.shape[2];
  if (cin != d.c) {
    throw ShapeError("conv1d_forward: input has " + std::to_string(d.c) +
                     " channels but filters expect " + std::to_string(cin) +
                     " (input " + TensorT<T>::shape_string(input.shape) + ", filters " +
                     TensorT<T>::shape_string(filters.shape) + ")");
  }
  if (bias.size() != cout) {
    throw ShapeError("conv1d_forward: bias extent " + std::to_string(bias.size()) +
                     " != out_channels " + std::to_string(cout));
  }
  if (k > d.t) {
    throw ShapeError("conv1d_forward: filter length " + std::to_string(k) +
                     " exceeds time extent " + std::to_string(d.t));
  }

  std::vector<int64_t> out_shape = input.shape;
  out_shape.back() = cout;
  TensorT<T> out(out_shape);
  const int64_t off = k / 2;
  const T* in = input.data();
  const T* f = filters.data();
  T* o = out.data();

#pragma omp parallel for schedule(static)
  for (int64_t bt = 0; bt < d.b * d.t; ++bt) {
    const int64_t b = bt / d.t, t = bt % d.t;
    T* orow = o + bt * cout;
    for (int64_t oc = 0; oc < cout; ++oc) orow[oc] = bias.values[oc];
    for (int64_t j = 0; j < k; ++j) {
      const int64_t s = t + j - off;
      if (s < 0 || s >= d.t) continue;  // zero padding
      const T* irow = in + (b * d.t + s) * d.c;
      const T* frow = f + j * cin * cout;
      for (int64_t c = 0; c < d.c; ++c) {
        const T xv = irow[c];
        const T* fc = frow + c * cout;
        for (int64_t oc = 0; oc < cout; ++oc) orow[oc] += xv * fc[oc];
      }
    }
  }
  return out;
}

template <class T>
struct Conv1dGrads {
  TensorT<T> input, filters, bias;
};

template <class T>
Conv1dGrads<T> conv1d_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input,
                               const TensorT<T>& filters, bool need_grad_input = true) {
  if (cached_input.size() == 0) throw ShapeError("conv1d_backward: missing cached input");
  const Btc d = btc_dims(cached_input, "conv1d_backward");
  const Btc g = btc_dims(grad_out, "conv1d_backward");
  const int64_t k = filters.shape[0], cin = filters.shape[1], cout = filters.shape[2];
  if (g.b != d.b || g.t != d.t || g.c != cout || cin != d.c) {
    throw ShapeError("conv1d_backward: inconsistent shapes (grad_out " +
                     TensorT<T>::shape_string(grad_out.shape) + ", input " +
                     TensorT<T>::shape_string(cached_input.shape) + ", filters " +
                     TensorT<T>::shape_string(filters.shape) + ")");
  }
  const int64_t off = k / 2;
  const T* gy = grad_out.data();
  const T* in = cached_input.data();
  const T* f = filters.data();

  Conv1dGrads<T> grads;
  grads.filters = TensorT<T>(filters.shape);
  grads.bias = TensorT<T>({cout});

  // d/bias and d/filters reduce over batch and time in a fixed serial order.
  T* gf = grads.filters.data();
#pragma omp parallel for schedule(static)
  for (int64_t jc = 0; jc < k * cin; ++jc) {
    const int64_t j = jc / cin, c = jc % cin;
    T* gfrow = gf + jc * cout;
    for (int64_t b = 0; b < d.b; ++b) {
      for (int64_t t = 0; t < d.t; ++t) {
        const int64_t s = t + j - off;
        if (s < 0 || s >= d.t) continue;
        const T xv = in[(b * d.t + s) * cin + c];
        const T* gyrow = gy + (b * d.t + t) * cout;
        for (int64_t oc = 0; oc < cout; ++oc) gfrow[oc] += xv * gyrow[oc];
      }
    }
  }
  for (int64_t b = 0; b < d.b; ++b) {
    for (int64_t t = 0; t < d.t; ++t) {
      const T* gyrow = gy + (b * d.t + t) * cout;
      for (int64_t oc = 0; oc < cout; ++oc) grads.bias.values[oc] += gyrow[oc];
    }
  }

  if (need_grad_input) {
    grads.input = TensorT<T>(cached_input.shape);
    T* gi = grads.input.data();
#pragma omp parallel for schedule(static)
    for (int64_t bs = 0; bs < d.b * d.t; ++bs) {
      const int64_t b = bs / d.t, s = bs % d.t;
      T* girow = gi + bs * cin;
      for (int64_t j = 0; j < k; ++j) {
        const int64_t t = s - j + off;  // forward read in[t+j-off]
        if (t < 0 || t >= d.t) continue;
        const T* gyrow = gy + (b * d.t + t) * cout;
        const T* frow = f + j * cin * cout;
        for (int64_t c = 0; c < cin; ++c) {
          T acc = 0;
          const T* fc = frow + c * cout;
          for (int64_t oc = 0; oc < cout; ++oc) acc += gyrow[oc] * fc[oc];
          girow[c] += acc;
        }
      }
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// relu

template <class T>
TensorT<T> relu_forward(const TensorT<T>& x) {
  TensorT<T> out(x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) {
    out.values[i] = x.values[i] > T(0) ? x.values[i] : T(0);
  }
  return out;
}

// Subgradient at 0 is 0.
template <class T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input) {
  if (!same_shape(grad_out, cached_input)) {
    throw ShapeError("relu_backward: grad shape " + TensorT<T>::shape_string(grad_out.shape) +
                     " != input shape " + TensorT<T>::shape_string(cached_input.shape));
  }
  TensorT<T> gx(grad_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < gx.size(); ++i) {
    gx.values[i] = cached_input.values[i] > T(0) ? grad_out.values[i] : T(0);
  }
  return gx;
}

// ---------------------------------------------------------------------------
// batch normalization over batch x time, per channel

template <class T>
struct BatchNormCache {
  TensorT<T> xhat;
  std::vector<T> inv_std;  // one per channel
};

// Train mode normalizes with batch statistics and updates running stats in
// place (running = momentum * running + (1 - momentum) * batch). Infer mode
// reads the running stats and touches nothing.
template <class T>
TensorT<T> batchnorm1d_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                               const TensorT<T>& beta, TensorT<T>& running_mean,
                               TensorT<T>& running_var, Mode mode, T momentum, T epsilon,
                               BatchNormCache<T>* cache = nullptr) {
  const Btc d = btc_dims(x, "batchnorm1d");
  if (gamma.size() != d.c || beta.size() != d.c || running_mean.size() != d.c ||
      running_var.size() != d.c) {
    throw ShapeError("batchnorm1d: channel mismatch, input has " + std::to_string(d.c) +
                     " channels, gamma " + std::to_string(gamma.size()) + ", beta " +
                     std::to_string(beta.size()));
  }
  TensorT<T> out(x.shape);
  const int64_t m = d.b * d.t;
  const T* in = x.data();
  T* o = out.data();

  if (mode == Mode::infer) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < d.c; ++c) {
      const T inv = T(1) / std::sqrt(running_var.values[c] + epsilon);
      const T g = gamma.values[c], bt = beta.values[c], mu = running_mean.values[c];
      for (int64_t i = 0; i < m; ++i) {
        o[i * d.c + c] = g * ((in[i * d.c + c] - mu) * inv) + bt;
      }
    }
    return out;
  }

  if (cache) {
    cache->xhat = TensorT<T>(x.shape);
    cache->inv_std.assign(static_cast<size_t>(d.c), T(0));
  }
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < d.c; ++c) {
    T sum = 0;
    for (int64_t i = 0; i < m; ++i) sum += in[i * d.c + c];
    const T mean = sum / T(m);
    T var = 0;
    for (int64_t i = 0; i < m; ++i) {
      const T dv = in[i * d.c + c] - mean;
      var += dv * dv;
    }
    var /= T(m);
    const T inv = T(1) / std::sqrt(var + epsilon);  // epsilon floors degenerate variance
    const T g = gamma.values[c], bt = beta.values[c];
    for (int64_t i = 0; i < m; ++i) {
      const T xh = (in[i * d.c + c] - mean) * inv;
      o[i * d.c + c] = g * xh + bt;
      if (cache) cache->xhat.values[i * d.c + c] = xh;
    }
    if (cache) cache->inv_std[static_cast<size_t>(c)] = inv;
    running_mean.values[c] = momentum * running_mean.values[c] + (T(1) - momentum) * mean;
    running_var.values[c] = momentum * running_var.values[c] + (T(1) - momentum) * var;
  }
  return out;
}

// Pure inference normalization against frozen running stats; safe to call
// concurrently on shared parameters.
template <class T>
TensorT<T> batchnorm1d_infer(const TensorT<T>& x, const TensorT<T>& gamma,
                             const TensorT<T>& beta, const TensorT<T>& running_mean,
                             const TensorT<T>& running_var, T epsilon) {
  const Btc d = btc_dims(x, "batchnorm1d_infer");
  if (gamma.size() != d.c || beta.size() != d.c || running_mean.size() != d.c ||
      running_var.size() != d.c) {
    throw ShapeError("batchnorm1d_infer: channel mismatch");
  }
  TensorT<T> out(x.shape);
  const int64_t m = d.b * d.t;
  const T* in = x.data();
  T* o = out.data();
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < d.c; ++c) {
    const T inv = T(1) / std::sqrt(running_var.values[c] + epsilon);
    const T g = gamma.values[c], bt = beta.values[c], mu = running_mean.values[c];
    for (int64_t i = 0; i < m; ++i) {
      o[i * d.c + c] = g * ((in[i * d.c + c] - mu) * inv) + bt;
    }
  }
  return out;
}

template <class T>
struct BatchNormGrads {
  TensorT<T> input, gamma, beta;
};

// Standard batch-norm backward; the mean/variance coupling shows up as the
// two correction terms subtracted from grad_out.
template <class T>
BatchNormGrads<T> batchnorm1d_backward(const TensorT<T>& grad_out, const BatchNormCache<T>& cache,
                                       const TensorT<T>& gamma) {
  if (cache.xhat.size() == 0) throw ShapeError("batchnorm1d_backward: missing cache");
  if (!same_shape(grad_out, cache.xhat)) {
    throw ShapeError("batchnorm1d_backward: grad shape mismatch");
  }
  const Btc d = btc_dims(grad_out, "batchnorm1d_backward");
  const int64_t m = d.b * d.t;
  BatchNormGrads<T> grads;
  grads.input = TensorT<T>(grad_out.shape);
  grads.gamma = TensorT<T>({d.c});
  grads.beta = TensorT<T>({d.c});
  const T* gy = grad_out.data();
  const T* xh = cache.xhat.data();
  T* gi = grads.input.data();

#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < d.c; ++c) {
    T sum_gy = 0, sum_gy_xhat = 0;
    for (int64_t i = 0; i < m; ++i) {
      sum_gy += gy[i * d.c + c];
      sum_gy_xhat += gy[i * d.c + c] * xh[i * d.c + c];
    }
    grads.beta.values[c] = sum_gy;
    grads.gamma.values[c] = sum_gy_xhat;
    const T scale = gamma.values[c] * cache.inv_std[static_cast<size_t>(c)];
    const T mean_gy = sum_gy / T(m);
    const T mean_gy_xhat = sum_gy_xhat / T(m);
    for (int64_t i = 0; i < m; ++i) {
      gi[i * d.c + c] =
          scale * (gy[i * d.c + c] - mean_gy - xh[i * d.c + c] * mean_gy_xhat);
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// inverted dropout, mask derived from (salt, element index)

template <class T>
TensorT<T> dropout_forward(const TensorT<T>& x, double rate, Mode mode, uint64_t salt) {
  if (rate >= 1.0 || rate < 0.0) {
    throw ConfigError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
  }
  if (mode == Mode::infer || rate == 0.0) return x;
  TensorT<T> out(x.shape);
  const T scale = T(1.0 / (1.0 - rate));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) {
    out.values[i] =
        hash_coin_below(salt, static_cast<uint64_t>(i), rate) ? T(0) : x.values[i] * scale;
  }
  return out;
}

template <class T>
TensorT<T> dropout_backward(const TensorT<T>& grad_out, double rate, Mode mode, uint64_t salt) {
  if (rate >= 1.0 || rate < 0.0) {
    throw ConfigError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
  }
  if (mode == Mode::infer || rate == 0.0) return grad_out;
  TensorT<T> gx(grad_out.shape);
  const T scale = T(1.0 / (1.0 - rate));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < gx.size(); ++i) {
    gx.values[i] = hash_coin_below(salt, static_cast<uint64_t>(i), rate)
                       ? T(0)
                       : grad_out.values[i] * scale;
  }
  return gx;
}

// ---------------------------------------------------------------------------
// max pooling, stride == size, trailing remainder dropped

struct MaxPoolCache {
  std::vector<int64_t> argmax;       // flat input index per output element
  std::vector<int64_t> input_shape;
};

template <class T>
TensorT<T> maxpool1d_forward(const TensorT<T>& x, int64_t size, MaxPoolCache* cache = nullptr) {
  const Btc d = btc_dims(x, "maxpool1d");
  if (size < 1) throw ShapeError("maxpool1d: size must be >= 1");
  if (size > d.t) {
    throw ShapeError("maxpool1d: pool size " + std::to_string(size) +
                     " exceeds time extent " + std::to_string(d.t));
  }
  const int64_t t_out = d.t / size;
  std::vector<int64_t> out_shape = x.shape;
  out_shape[x.rank() == 3 ? 1 : 0] = t_out;
  TensorT<T> out(out_shape);
  if (cache) {
    cache->argmax.assign(static_cast<size_t>(out.size()), 0);
    cache->input_shape = x.shape;
  }
  const T* in = x.data();
  T* o = out.data();
#pragma omp parallel for schedule(static)
  for (int64_t idx = 0; idx < d.b * t_out * d.c; ++idx) {
    const int64_t c = idx % d.c;
    const int64_t p = (idx / d.c) % t_out;
    const int64_t b = idx / (d.c * t_out);
    int64_t best = (b * d.t + p * size) * d.c + c;
    T best_v = in[best];
    for (int64_t w = 1; w < size; ++w) {
      const int64_t cand = (b * d.t + p * size + w) * d.c + c;
      if (in[cand] > best_v) {  // first max wins ties
        best_v = in[cand];
        best = cand;
      }
    }
    o[idx] = best_v;
    if (cache) cache->argmax[static_cast<size_t>(idx)] = best;
  }
  return out;
}

template <class T>
TensorT<T> maxpool1d_backward(const TensorT<T>& grad_out, const MaxPoolCache& cache) {
  if (cache.input_shape.empty()) throw ShapeError("maxpool1d_backward: missing cache");
  if (cache.argmax.size() != static_cast<size_t>(grad_out.size())) {
    throw ShapeError("maxpool1d_backward: grad/cache size mismatch");
  }
  TensorT<T> gx(cache.input_shape);
  // Pool windows are disjoint, so the scatter below is race-free.
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < grad_out.size(); ++i) {
    gx.values[cache.argmax[static_cast<size_t>(i)]] += grad_out.values[i];
  }
  return gx;
}

// ---------------------------------------------------------------------------
// sigmoid

template <class T>
TensorT<T> sigmoid_forward(const TensorT<T>& x) {
  TensorT<T> out(x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) {
    out.values[i] = T(1) / (T(1) + std::exp(-x.values[i]));
  }
  return out;
}

template <class T>
TensorT<T> sigmoid_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_output) {
  if (!same_shape(grad_out, cached_output)) {
    throw ShapeError("sigmoid_backward: shape mismatch");
  }
  TensorT<T> gx(grad_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < gx.size(); ++i) {
    const T s = cached_output.values[i];
    gx.values[i] = grad_out.values[i] * s * (T(1) - s);
  }
  return gx;
}

// ---------------------------------------------------------------------------
// elementwise |a - b|

template <class T>
TensorT<T> abs_diff_forward(const TensorT<T>& a, const TensorT<T>& b) {
  if (!same_shape(a, b)) {
    throw ShapeError("abs_diff: shape mismatch " + TensorT<T>::shape_string(a.shape) + " vs " +
                     TensorT<T>::shape_string(b.shape));
  }
  TensorT<T> out(a.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < a.size(); ++i) {
    out.values[i] = std::abs(a.values[i] - b.values[i]);
  }
  return out;
}

// Subgradient at a == b is 0.
template <class T>
std::pair<TensorT<T>, TensorT<T>> abs_diff_backward(const TensorT<T>& grad_out,
                                                    const TensorT<T>& a, const TensorT<T>& b) {
  if (!same_shape(grad_out, a) || !same_shape(a, b)) {
    throw ShapeError("abs_diff_backward: shape mismatch");
  }
  TensorT<T> ga(a.shape), gb(b.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < a.size(); ++i) {
    const T dv = a.values[i] - b.values[i];
    const T sign = dv > T(0) ? T(1) : (dv < T(0) ? T(-1) : T(0));
    ga.values[i] = grad_out.values[i] * sign;
    gb.values[i] = -grad_out.values[i] * sign;
  }
  return {std::move(ga), std::move(gb)};
}

// ---------------------------------------------------------------------------
// dense: out[b,o] = bias[o] + sum_d x[b,d] * w[d,o]

template <class T>
inline std::pair<int64_t, int64_t> dense_dims(const TensorT<T>& x, const char* who) {
  if (x.rank() == 2) return {x.shape[0], x.shape[1]};
  if (x.rank() == 1) return {int64_t{1}, x.shape[0]};
  throw ShapeError(std::string(who) + ": expected rank-1 or rank-2 input, got " +
                   TensorT<T>::shape_string(x.shape));
}

template <class T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& weights, const TensorT<T>& bias) {
  const auto [bsz, din] = dense_dims(x, "dense_forward");
  if (weights.rank() != 2 || weights.shape[0] != din) {
    throw ShapeError("dense_forward: weights " + TensorT<T>::shape_string(weights.shape) +
                     " incompatible with input dim " + std::to_string(din));
  }
  const int64_t dout = weights.shape[1];
  if (bias.size() != dout) throw ShapeError("dense_forward: bias extent mismatch");
  TensorT<T> out(x.rank() == 2 ? std::vector<int64_t>{bsz, dout} : std::vector<int64_t>{dout});
#pragma omp parallel for schedule(static)
  for (int64_t bo = 0; bo < bsz * dout; ++bo) {
    const int64_t b = bo / dout, o = bo % dout;
    T acc = bias.values[o];
    const T* xrow = x.data() + b * din;
    for (int64_t dd = 0; dd < din; ++dd) acc += xrow[dd] * weights.values[dd * dout + o];
    out.values[bo] = acc;
  }
  return out;
}

template <class T>
struct DenseGrads {
  TensorT<T> input, weights, bias;
};

template <class T>
DenseGrads<T> dense_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input,
                             const TensorT<T>& weights) {
  if (cached_input.size() == 0) throw ShapeError("dense_backward: missing cached input");
  const auto [bsz, din] = dense_dims(cached_input, "dense_backward");
  const int64_t dout = weights.shape[1];
  const auto [gb, go] = dense_dims(grad_out, "dense_backward");
  if (gb != bsz || go != dout) throw ShapeError("dense_backward: grad shape mismatch");

  DenseGrads<T> grads;
  grads.input = TensorT<T>(cached_input.shape);
  grads.weights = TensorT<T>(weights.shape);
  grads.bias = TensorT<T>({dout});
  const T* gy = grad_out.data();
  const T* xin = cached_input.data();

#pragma omp parallel for schedule(static)
  for (int64_t bd = 0; bd < bsz * din; ++bd) {
    const int64_t b = bd / din, dd = bd % din;
    T acc = 0;
    for (int64_t o = 0; o < dout; ++o) acc += gy[b * dout + o] * weights.values[dd * dout + o];
    grads.input.values[bd] = acc;
  }
#pragma omp parallel for schedule(static)
  for (int64_t dw = 0; dw < din * dout; ++dw) {
    const int64_t dd = dw / dout, o = dw % dout;
    T acc = 0;
    for (int64_t b = 0; b < bsz; ++b) acc += xin[b * din + dd] * gy[b * dout + o];
    grads.weights.values[dw] = acc;
  }
  for (int64_t b = 0; b < bsz; ++b) {
    for (int64_t o = 0; o < dout; ++o) grads.bias.values[o] += gy[b * dout + o];
  }
  return grads;
}

// ---------------------------------------------------------------------------
// binary cross-entropy, mean over the batch

inline constexpr double kBceClamp = 1e-7;

template <class T>
void check_bce_args(const TensorT<T>& predicted, const TensorT<T>& targets) {
  if (predicted.size() != targets.size()) {
    throw ShapeError("bce: predicted count " + std::to_string(predicted.size()) +
                     " != target count " + std::to_string(targets.size()));
  }
  if (predicted.size() == 0) throw ShapeError("bce: empty batch");
  for (int64_t i = 0; i < targets.size(); ++i) {
    if (targets.values[i] != T(0) && targets.values[i] != T(1)) {
      throw Error("bce: target at index " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

template <class T>
T bce_loss(const TensorT<T>& predicted, const TensorT<T>& targets) {
  check_bce_args(predicted, targets);
  const T lo = T(kBceClamp), hi = T(1) - T(kBceClamp);
  T total = 0;
  for (int64_t i = 0; i < predicted.size(); ++i) {
    const T p = std::min(hi, std::max(lo, predicted.values[i]));
    total += targets.values[i] == T(1) ? -std::log(p) : -std::log(T(1) - p);
  }
  return total / T(predicted.size());
}

// dLoss/dPredicted, clamp treated as pass-through.
template <class T>
TensorT<T> bce_backward(const TensorT<T>& predicted, const TensorT<T>& targets) {
  check_bce_args(predicted, targets);
  const T lo = T(kBceClamp), hi = T(1) - T(kBceClamp);
  TensorT<T> grad(predicted.shape);
  const T inv_n = T(1) / T(predicted.size());
  for (int64_t i = 0; i < predicted.size(); ++i) {
    const T p = std::min(hi, std::max(lo, predicted.values[i]));
    const T y = targets.values[i];
    grad.values[i] = inv_n * (-y / p + (T(1) - y) / (T(1) - p));
  }
  return grad;
}

}  // namespace nn
}  // namespace fsts
