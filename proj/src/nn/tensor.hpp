#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cgmkit::nn {

// Dense row-major tensor. Conv data uses the (batch, channels, depth,
// height, width) convention. The production dtype is float; the double
// instantiation exists for the finite-difference reference path.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until ensure_grad()

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)), values(checked_numel(shape), T(0)) {}
  TensorT(std::vector<int> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    require(std::int64_t(values.size()) == checked_numel(shape), ErrorKind::shape_mismatch,
            "tensor value count does not match shape");
  }

  static std::int64_t checked_numel(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      require(d > 0, ErrorKind::shape_mismatch, "tensor dimensions must be positive");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return std::int64_t(values.size()); }
  int dim(int i) const { return shape[std::size_t(i)]; }

  T* data() { return values.data(); }
  const T* data() const { return values.data(); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }
  void zero_grad() { grad.assign(values.size(), T(0)); }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.values.assign(values.begin(), values.end());
    return out;
  }

  friend bool operator==(const TensorT&, const TensorT&) = default;
};

using Tensor = TensorT<float>;

template <typename T>
bool same_shape(const TensorT<T>& a, const TensorT<T>& b) {
  return a.shape == b.shape;
}

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace cgmkit::nn
