#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fsts/errors.hpp"
#include "fsts/kernels.hpp"
#include "fsts/tensor.hpp"

// Serial reference implementations of the hot kernels. Same contracts and
// the same inner-loop accumulation order as fsts::nn, but no threading, so
// the parallel kernels must reproduce these results bit for bit. Used by
// the test suite and the benchmark; not called on any production path.

namespace fsts::ref {

template <class T>
TensorT<T> conv1d_forward(const TensorT<T>& input, const TensorT<T>& filters,
                          const TensorT<T>& bias) {
  const nn::Btc d = nn::btc_dims(input, "ref::conv1d_forward");
  const int64_t k = filters.shape[0], cin = filters.shape[1], cout = filters.shape[2];
  if (cin != d.c) throw ShapeError("ref::conv1d_forward: channel mismatch");
  std::vector<int64_t> out_shape = input.shape;
  out_shape.back() = cout;
  TensorT<T> out(out_shape);
  const int64_t off = k / 2;
  for (int64_t bt = 0; bt < d.b * d.t; ++bt) {
    const int64_t b = bt / d.t, t = bt % d.t;
    T* orow = out.data() + bt * cout;
    for (int64_t oc = 0; oc < cout; ++oc) orow[oc] = bias.values[oc];
    for (int64_t j = 0; j < k; ++j) {
      const int64_t s = t + j - off;
      if (s < 0 || s >= d.t) continue;
      const T* irow = input.data() + (b * d.t + s) * d.c;
      const T* frow = filters.data() + j * cin * cout;
      for (int64_t c = 0; c < d.c; ++c) {
        const T xv = irow[c];
        for (int64_t oc = 0; oc < cout; ++oc) orow[oc] += xv * frow[c * cout + oc];
      }
    }
  }
  return out;
}

template <class T>
nn::Conv1dGrads<T> conv1d_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input,
                                   const TensorT<T>& filters) {
  const nn::Btc d = nn::btc_dims(cached_input, "ref::conv1d_backward");
  const int64_t k = filters.shape[0], cin = filters.shape[1], cout = filters.shape[2];
  const int64_t off = k / 2;
  nn::Conv1dGrads<T> grads;
  grads.input = TensorT<T>(cached_input.shape);
  grads.filters = TensorT<T>(filters.shape);
  grads.bias = TensorT<T>({cout});
  const T* gy = grad_out.data();

  for (int64_t jc = 0; jc < k * cin; ++jc) {
    const int64_t j = jc / cin, c = jc % cin;
    T* gfrow = grads.filters.data() + jc * cout;
    for (int64_t b = 0; b < d.b; ++b) {
      for (int64_t t = 0; t < d.t; ++t) {
        const int64_t s = t + j - off;
        if (s < 0 || s >= d.t) continue;
        const T xv = cached_input.values[(b * d.t + s) * cin + c];
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
  for (int64_t bs = 0; bs < d.b * d.t; ++bs) {
    const int64_t b = bs / d.t, s = bs % d.t;
    T* girow = grads.input.data() + bs * cin;
    for (int64_t j = 0; j < k; ++j) {
      const int64_t t = s - j + off;
      if (t < 0 || t >= d.t) continue;
      const T* gyrow = gy + (b * d.t + t) * cout;
      const T* frow = filters.data() + j * cin * cout;
      for (int64_t c = 0; c < cin; ++c) {
        T acc = 0;
        for (int64_t oc = 0; oc < cout; ++oc) acc += gyrow[oc] * frow[c * cout + oc];
        girow[c] += acc;
      }
    }
  }
  return grads;
}

template <class T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& weights, const TensorT<T>& bias) {
  const auto [bsz, din] = nn::dense_dims(x, "ref::dense_forward");
  const int64_t dout = weights.shape[1];
  TensorT<T> out(x.rank() == 2 ? std::vector<int64_t>{bsz, dout} : std::vector<int64_t>{dout});
  for (int64_t bo = 0; bo < bsz * dout; ++bo) {
    const int64_t b = bo / dout, o = bo % dout;
    T acc = bias.values[o];
    for (int64_t dd = 0; dd < din; ++dd) {
      acc += x.values[b * din + dd] * weights.values[dd * dout + o];
    }
    out.values[bo] = acc;
  }
  return out;
}

template <class T>
nn::DenseGrads<T> dense_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input,
                                 const TensorT<T>& weights) {
  const auto [bsz, din] = nn::dense_dims(cached_input, "ref::dense_backward");
  const int64_t dout = weights.shape[1];
  nn::DenseGrads<T> grads;
  grads.input = TensorT<T>(cached_input.shape);
  grads.weights = TensorT<T>(weights.shape);
  grads.bias = TensorT<T>({dout});
  for (int64_t bd = 0; bd < bsz * din; ++bd) {
    const int64_t b = bd / din, dd = bd % din;
    T acc = 0;
    for (int64_t o = 0; o < dout; ++o) {
      acc += grad_out.values[b * dout + o] * weights.values[dd * dout + o];
    }
    grads.input.values[bd] = acc;
  }
  for (int64_t dw = 0; dw < din * dout; ++dw) {
    const int64_t dd = dw / dout, o = dw % dout;
    T acc = 0;
    for (int64_t b = 0; b < bsz; ++b) {
      acc += cached_input.values[b * din + dd] * grad_out.values[b * dout + o];
    }
    grads.weights.values[dw] = acc;
  }
  for (int64_t b = 0; b < bsz; ++b) {
    for (int64_t o = 0; o < dout; ++o) grads.bias.values[o] += grad_out.values[b * dout + o];
  }
  return grads;
}

template <class T>
TensorT<T> batchnorm1d_forward(const TensorT<T>& x, const TensorT<T>& gamma,
                               const TensorT<T>& beta, TensorT<T>& running_mean,
                               TensorT<T>& running_var, Mode mode, T momentum, T epsilon) {
  const nn::Btc d = nn::btc_dims(x, "ref::batchnorm1d");
  TensorT<T> out(x.shape);
  const int64_t m = d.b * d.t;
  if (mode == Mode::infer) {
    for (int64_t c = 0; c < d.c; ++c) {
      const T inv = T(1) / std::sqrt(running_var.values[c] + epsilon);
      for (int64_t i = 0; i < m; ++i) {
        out.values[i * d.c + c] =
            gamma.values[c] * ((x.values[i * d.c + c] - running_mean.values[c]) * inv) +
            beta.values[c];
      }
    }
    return out;
  }
  for (int64_t c = 0; c < d.c; ++c) {
    T sum = 0;
    for (int64_t i = 0; i < m; ++i) sum += x.values[i * d.c + c];
    const T mean = sum / T(m);
    T var = 0;
    for (int64_t i = 0; i < m; ++i) {
      const T dv = x.values[i * d.c + c] - mean;
      var += dv * dv;
    }
    var /= T(m);
    const T inv = T(1) / std::sqrt(var + epsilon);
    for (int64_t i = 0; i < m; ++i) {
      out.values[i * d.c + c] = gamma.values[c] * ((x.values[i * d.c + c] - mean) * inv) +
                                beta.values[c];
    }
    running_mean.values[c] = momentum * running_mean.values[c] + (T(1) - momentum) * mean;
    running_var.values[c] = momentum * running_var.values[c] + (T(1) - momentum) * var;
  }
  return out;
}

// Full-matrix dynamic-time-warping cost, O(n*m) memory. Second route to the
// same recurrence as fsts::dtw_distance, which keeps only two rows.
double dtw_full_matrix(const float* a, size_t n, const float* b, size_t m);

}  // namespace fsts::ref
