#pragma once

#include <type_traits>

#include "tensor.hpp"

namespace cgmkit::nn {

// 3D convolution with isotropic kernel/stride/padding. Weights are
// (out_ch, in_ch, k, k, k); transposed-conv weights are
// (in_ch, out_ch, k, k, k) so that a conv and its adjoint can share one
// parameter tensor. Inner products run on BLAS GEMM via im2col.

struct ConvGeom {
  int kernel = 4;
  int stride = 2;
  int pad = 1;
};

template <typename T>
struct ConvGrads {
  TensorT<T> gx, gw, gb;
};

template <typename T>
TensorT<T> conv3d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                          ConvGeom geom = {});

template <typename T>
ConvGrads<T> conv3d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& gout,
                             ConvGeom geom = {});

template <typename T>
TensorT<T> convtranspose3d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                                   ConvGeom geom = {});

template <typename T>
ConvGrads<T> convtranspose3d_backward(const TensorT<T>& x, const TensorT<T>& w,
                                      const TensorT<T>& gout, ConvGeom geom = {});

// Batch normalization over (batch, depth, height, width) per channel.
// Training mode normalizes with batch statistics and, when update_running
// is set, folds them into the running estimates; inference mode uses the
// running statistics as fixed constants.
template <typename T>
struct BatchNormCache {
  TensorT<T> x_hat;
  std::vector<T> inv_std;  // per channel
  bool training = true;
};

template <typename T>
struct BatchNormGrads {
  TensorT<T> gx, gscale, gshift;
};

template <typename T>
TensorT<T> batchnorm3d_forward(const TensorT<T>& x, const TensorT<T>& scale,
                               const TensorT<T>& shift, TensorT<T>& running_mean,
                               TensorT<T>& running_var, bool training, bool update_running,
                               std::type_identity_t<BatchNormCache<T>*> cache,
                               double momentum = 0.1, double eps = 1e-5);

template <typename T>
BatchNormGrads<T> batchnorm3d_backward(const TensorT<T>& gout, const TensorT<T>& scale,
                                       const BatchNormCache<T>& cache);

// Elementwise activations; backward takes whatever the forward cached
// (input for the relu family, output for the squashing pair).
template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> relu_backward(const TensorT<T>& gout, const TensorT<T>& x);

template <typename T>
TensorT<T> leaky_relu_forward(const TensorT<T>& x, T slope);
template <typename T>
TensorT<T> leaky_relu_backward(const TensorT<T>& gout, const TensorT<T>& x, T slope);

template <typename T>
TensorT<T> sigmoid_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> sigmoid_backward(const TensorT<T>& gout, const TensorT<T>& y);

template <typename T>
TensorT<T> tanh_forward(const TensorT<T>& x);
template <typename T>
TensorT<T> tanh_backward(const TensorT<T>& gout, const TensorT<T>& y);

// Mean of squared element differences; the gradient is with respect to
// the first argument.
template <typename T>
T mse(const TensorT<T>& a, const TensorT<T>& b);
template <typename T>
TensorT<T> mse_backward(const TensorT<T>& a, const TensorT<T>& b);

// Least-squares adversarial term: mean of (d_out - target)^2.
template <typename T>
T lsgan_term(const TensorT<T>& d_out, T target);
template <typename T>
TensorT<T> lsgan_backward(const TensorT<T>& d_out, T target);

}  // namespace cgmkit::nn
