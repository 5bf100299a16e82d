#pragma once

#include <vector>

#include "tensor.hpp"

namespace cgmkit::nn {

// Adam with bias correction. Moment buffers are laid out to match the
// parameter list handed to the first step; the list must stay stable.
template <typename T>
struct AdamState {
  T lr = T(2e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
  long step = 0;
  std::vector<std::vector<T>> m, v;
};

template <typename T>
void adam_step(const std::vector<TensorT<T>*>& params, AdamState<T>& state) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->values.size(), T(0));
      state.v[i].assign(params[i]->values.size(), T(0));
    }
  }
  require(state.m.size() == params.size(), ErrorKind::validation,
          "adam state does not match parameter list");
  ++state.step;
  const double bc1 = 1.0 - std::pow(double(state.beta1), double(state.step));
  const double bc2 = 1.0 - std::pow(double(state.beta2), double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorT<T>& p = *params[i];
    require(p.grad.size() == p.values.size(), ErrorKind::validation,
            "parameter is missing its gradient");
    require(state.m[i].size() == p.values.size(), ErrorKind::validation,
            "adam moment size mismatch");
    for (std::size_t e = 0; e < p.values.size(); ++e) {
      const double g = double(p.grad[e]);
      const double m = double(state.beta1) * double(state.m[i][e]) + (1.0 - double(state.beta1)) * g;
      const double v = double(state.beta2) * double(state.v[i][e]) + (1.0 - double(state.beta2)) * g * g;
      state.m[i][e] = T(m);
      state.v[i][e] = T(v);
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      p.values[e] = T(double(p.values[e]) - double(state.lr) * m_hat / (std::sqrt(v_hat) + double(state.eps)));
    }
  }
}

template <typename T>
void zero_grads(const std::vector<TensorT<T>*>& params) {
  for (auto* p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
}

}  // namespace cgmkit::nn
