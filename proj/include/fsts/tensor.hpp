#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fsts/errors.hpp"

namespace fsts {

// Dense row-major tensor. Training and inference run in float; the same
// code instantiated with double backs the finite-difference gradient checks.
template <class T>
struct TensorT {
  std::vector<int64_t> shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty unless gradients are being tracked

  TensorT() = default;

  explicit TensorT(std::vector<int64_t> s, T fill = T(0)) : shape(std::move(s)) {
    values.assign(static_cast<size_t>(checked_size(shape)), fill);
  }

  TensorT(std::vector<int64_t> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<int64_t>(values.size()) != checked_size(shape)) {
      throw ShapeError("tensor value count " + std::to_string(values.size()) +
                       " does not match shape " + shape_string(shape));
    }
  }

  int64_t size() const { return static_cast<int64_t>(values.size()); }
  int rank() const { return static_cast<int>(shape.size()); }

  int64_t extent(int axis) const {
    if (axis < 0 || axis >= rank()) throw ShapeError("tensor axis out of range");
    return shape[static_cast<size_t>(axis)];
  }

  bool has_grad() const { return !grad.empty(); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }

  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
  void drop_grad() { grad.clear(); }

  T* data() { return values.data(); }
  const T* data() const { return values.data(); }

  static int64_t checked_size(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t e : s) {
      if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_string(s));
      n *= e;
    }
    return n;
  }

  static std::string shape_string(const std::vector<int64_t>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
  }
};

using Tensor = TensorT<float>;

template <class T>
bool same_shape(const TensorT<T>& a, const TensorT<T>& b) {
  return a.shape == b.shape;
}

// A parameter tensor with the name it carries in checkpoints and errors.
template <class T>
struct NamedTensorT {
  std::string name;
  TensorT<T>* tensor;
};

using NamedTensor = NamedTensorT<float>;

}  // namespace fsts
