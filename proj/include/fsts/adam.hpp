#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsts/errors.hpp"
#include "fsts/tensor.hpp"

namespace fsts {

// Adam with bias correction. One first/second-moment accumulator pair per
// parameter tensor, shapes mirrored exactly.
template <class T>
struct AdamStateT {
  int64_t step = 0;
  T learning_rate = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;

  static AdamStateT init(const std::vector<NamedTensorT<T>>& params, T lr = T(1e-3),
                         T b1 = T(0.9), T b2 = T(0.999), T eps = T(1e-8)) {
    if (!(lr > T(0))) throw ConfigError("adam: learning rate must be positive");
    if (!(b1 > T(0) && b1 < T(1)) || !(b2 > T(0) && b2 < T(1)) || !(eps > T(0))) {
      throw ConfigError("adam: require 0 < beta1 < 1, 0 < beta2 < 1, epsilon > 0");
    }
    AdamStateT st;
    st.learning_rate = lr;
    st.beta1 = b1;
    st.beta2 = b2;
    st.epsilon = eps;
    for (const auto& p : params) {
      st.first_moment.emplace_back(p.tensor->values.size(), T(0));
      st.second_moment.emplace_back(p.tensor->values.size(), T(0));
    }
    return st;
  }
};

using AdamState = AdamStateT<float>;

// One update. Gradients are left untouched; the caller zeroes them.
template <class T>
void adam_step(const std::vector<NamedTensorT<T>>& params, AdamStateT<T>& state) {
  if (params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                     " tensors but got " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i].tensor->has_grad()) {
      throw Error("adam_step: parameter '" + params[i].name + "' has no gradient");
    }
    if (state.first_moment[i].size() != params[i].tensor->values.size()) {
      throw ShapeError("adam_step: accumulator shape drifted for '" + params[i].name + "'");
    }
  }
  state.step += 1;
  const T bc1 = T(1) - std::pow(state.beta1, T(state.step));
  const T bc2 = T(1) - std::pow(state.beta2, T(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    TensorT<T>& p = *params[i].tensor;
    std::vector<T>& m = state.first_moment[i];
    std::vector<T>& v = state.second_moment[i];
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < p.size(); ++j) {
      const T g = p.grad[j];
      m[j] = state.beta1 * m[j] + (T(1) - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (T(1) - state.beta2) * g * g;
      const T m_hat = m[j] / bc1;
      const T v_hat = v[j] / bc2;
      p.values[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace fsts
