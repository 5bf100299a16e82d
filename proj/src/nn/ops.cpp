#include "ops.hpp"

#include <cblas.h>

#include <cmath>

#include "../runtime.hpp"

namespace cgmkit::nn {

namespace {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a, const float* b,
          float beta, float* c) {
  configure_blas_threads();
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, 1.0f, a, trans_a ? m : k, b,
              trans_b ? k : n, beta, c, n);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double beta, double* c) {
  configure_blas_threads();
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, 1.0, a, trans_a ? m : k, b,
              trans_b ? k : n, beta, c, n);
}

struct Dims3 {
  int d = 1, h = 1, w = 1;
  std::int64_t volume() const { return std::int64_t(d) * h * w; }
};

// conv output extent; also the position grid of a transposed conv input.
int conv_extent(int in, const ConvGeom& g) {
  int span = in + 2 * g.pad - g.kernel;
  require(span >= 0 && span % g.stride == 0, ErrorKind::shape_mismatch,
          "spatial extent incompatible with kernel/stride/padding");
  return span / g.stride + 1;
}

int convt_extent(int in, const ConvGeom& g) { return (in - 1) * g.stride - 2 * g.pad + g.kernel; }

// cols[(c*k^3 + kidx), t] = img[c, pos(t, kidx)], zero outside img.
// Positions map into the image as p*stride - pad + k per axis.
template <typename T>
void im2col(const T* img, int channels, Dims3 img_d, Dims3 pos_d, const ConvGeom& g, T* cols) {
  const int k = g.kernel;
  const std::int64_t img_hw = std::int64_t(img_d.h) * img_d.w;
  const std::int64_t img_vol = img_d.d * img_hw;
  std::int64_t row = 0;
  for (int c = 0; c < channels; ++c) {
    const T* src = img + c * img_vol;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          T* dst = cols + row * pos_d.volume();
          for (int pd = 0; pd < pos_d.d; ++pd) {
            const int id = pd * g.stride - g.pad + kd;
            const bool d_ok = id >= 0 && id < img_d.d;
            for (int ph = 0; ph < pos_d.h; ++ph) {
              const int ih = ph * g.stride - g.pad + kh;
              const bool h_ok = ih >= 0 && ih < img_d.h;
              for (int pw = 0; pw < pos_d.w; ++pw, ++dst) {
                const int iw = pw * g.stride - g.pad + kw;
                *dst = (d_ok && h_ok && iw >= 0 && iw < img_d.w)
                           ? src[id * img_hw + ih * img_d.w + iw]
                           : T(0);
              }
            }
          }
        }
  }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im(const T* cols, int channels, Dims3 img_d, Dims3 pos_d, const ConvGeom& g, T* img) {
  const int k = g.kernel;
  const std::int64_t img_hw = std::int64_t(img_d.h) * img_d.w;
  const std::int64_t img_vol = img_d.d * img_hw;
  std::int64_t row = 0;
  for (int c = 0; c < channels; ++c) {
    T* dst = img + c * img_vol;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          const T* src = cols + row * pos_d.volume();
          for (int pd = 0; pd < pos_d.d; ++pd) {
            const int id = pd * g.stride - g.pad + kd;
            const bool d_ok = id >= 0 && id < img_d.d;
            for (int ph = 0; ph < pos_d.h; ++ph) {
              const int ih = ph * g.stride - g.pad + kh;
              const bool h_ok = ih >= 0 && ih < img_d.h;
              for (int pw = 0; pw < pos_d.w; ++pw, ++src) {
                const int iw = pw * g.stride - g.pad + kw;
                if (d_ok && h_ok && iw >= 0 && iw < img_d.w) dst[id * img_hw + ih * img_d.w + iw] += *src;
              }
            }
          }
        }
  }
}

template <typename T>
void check_conv_args(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                     const ConvGeom& g) {
  require(g.kernel >= 1 && g.stride >= 1 && g.pad >= 0, ErrorKind::validation,
          "bad conv geometry");
  require(x.shape.size() == 5, ErrorKind::shape_mismatch, "conv input must be 5-D");
  require(w.shape.size() == 5 && w.dim(2) == g.kernel && w.dim(3) == g.kernel &&
              w.dim(4) == g.kernel,
          ErrorKind::shape_mismatch, "conv weight must be (A,B,k,k,k)");
  require(b.shape.size() == 1, ErrorKind::shape_mismatch, "conv bias must be 1-D");
}

template <typename T>
void add_bias(T* out, const TensorT<T>& b, int batch, int channels, std::int64_t vol) {
  for (int n = 0; n < batch; ++n)
    for (int c = 0; c < channels; ++c) {
      const T bc = b.values[c];
      T* p = out + (std::int64_t(n) * channels + c) * vol;
      for (std::int64_t i = 0; i < vol; ++i) p[i] += bc;
    }
}

}  // namespace

template <typename T>
TensorT<T> conv3d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                          ConvGeom g) {
  check_conv_args(x, w, b, g);
  const int batch = x.dim(0), ci = x.dim(1), co = w.dim(0);
  require(w.dim(1) == ci, ErrorKind::shape_mismatch, "conv weight in-channels mismatch");
  require(b.dim(0) == co, ErrorKind::shape_mismatch, "conv bias size mismatch");
  const Dims3 in{x.dim(2), x.dim(3), x.dim(4)};
  const Dims3 out{conv_extent(in.d, g), conv_extent(in.h, g), conv_extent(in.w, g)};
  const int k3 = g.kernel * g.kernel * g.kernel;

  TensorT<T> y({batch, co, out.d, out.h, out.w});
  std::vector<T> cols(std::size_t(ci) * k3 * out.volume());
  for (int n = 0; n < batch; ++n) {
    im2col(x.data() + std::int64_t(n) * ci * in.volume(), ci, in, out, g, cols.data());
    gemm(false, false, co, int(out.volume()), ci * k3, w.data(), cols.data(), T(0),
         y.data() + std::int64_t(n) * co * out.volume());
  }
  add_bias(y.data(), b, batch, co, out.volume());
  return y;
}

template <typename T>
ConvGrads<T> conv3d_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& gout,
                             ConvGeom g) {
  const int batch = x.dim(0), ci = x.dim(1), co = w.dim(0);
  const Dims3 in{x.dim(2), x.dim(3), x.dim(4)};
  const Dims3 out{conv_extent(in.d, g), conv_extent(in.h, g), conv_extent(in.w, g)};
  require(gout.shape == std::vector<int>({batch, co, out.d, out.h, out.w}),
          ErrorKind::shape_mismatch, "conv gradient shape mismatch");
  const int k3 = g.kernel * g.kernel * g.kernel;

  ConvGrads<T> grads{TensorT<T>(x.shape), TensorT<T>(w.shape), TensorT<T>({co})};
  std::vector<T> cols(std::size_t(ci) * k3 * out.volume());
  for (int n = 0; n < batch; ++n) {
    const T* go_n = gout.data() + std::int64_t(n) * co * out.volume();
    // d/dw: gout x cols^T, accumulated across the batch
    im2col(x.data() + std::int64_t(n) * ci * in.volume(), ci, in, out, g, cols.data());
    gemm(false, true, co, ci * k3, int(out.volume()), go_n, cols.data(), T(1), grads.gw.data());
    // d/dx: w^T x gout, scattered back
    gemm(true, false, ci * k3, int(out.volume()), co, w.data(), go_n, T(0), cols.data());
    col2im(cols.data(), ci, in, out, g, grads.gx.data() + std::int64_t(n) * ci * in.volume());
  }
  for (int n = 0; n < batch; ++n)
    for (int c = 0; c < co; ++c) {
      const T* p = gout.data() + (std::int64_t(n) * co + c) * out.volume();
      double acc = 0.0;
      for (std::int64_t i = 0; i < out.volume(); ++i) acc += double(p[i]);
      grads.gb.values[c] += T(acc);
    }
  return grads;
}

template <typename T>
TensorT<T> convtranspose3d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                                   ConvGeom g) {
  check_conv_args(x, w, b, g);
  const int batch = x.dim(0), ci = x.dim(1), co = w.dim(1);
  require(w.dim(0) == ci, ErrorKind::shape_mismatch, "transposed conv weight in-channels mismatch");
  require(b.dim(0) == co, ErrorKind::shape_mismatch, "transposed conv bias size mismatch");
  const Dims3 in{x.dim(2), x.dim(3), x.dim(4)};
  const Dims3 out{convt_extent(in.d, g), convt_extent(in.h, g), convt_extent(in.w, g)};
  require(out.d >= 1 && out.h >= 1 && out.w >= 1, ErrorKind::shape_mismatch,
          "transposed conv output collapses to nothing");
  // Consistency with the adjoint: positions of the matching conv must
  // reproduce the input grid.
  require(conv_extent(out.d, g) == in.d && conv_extent(out.h, g) == in.h &&
              conv_extent(out.w, g) == in.w,
          ErrorKind::shape_mismatch, "transposed conv geometry is not invertible");
  const int k3 = g.kernel * g.kernel * g.kernel;

  TensorT<T> y({batch, co, out.d, out.h, out.w});
  std::vector<T> cols(std::size_t(co) * k3 * in.volume());
  for (int n = 0; n < batch; ++n) {
    gemm(true, false, co * k3, int(in.volume()), ci, w.data(),
         x.data() + std::int64_t(n) * ci * in.volume(), T(0), cols.data());
    col2im(cols.data(), co, out, in, g, y.data() + std::int64_t(n) * co * out.volume());
  }
  add_bias(y.data(), b, batch, co, out.volume());
  return y;
}

template <typename T>
ConvGrads<T> convtranspose3d_backward(const TensorT<T>& x, const TensorT<T>& w,
                                      const TensorT<T>& gout, ConvGeom g) {
  const int batch = x.dim(0), ci = x.dim(1), co = w.dim(1);
  const Dims3 in{x.dim(2), x.dim(3), x.dim(4)};
  const Dims3 out{convt_extent(in.d, g), convt_extent(in.h, g), convt_extent(in.w, g)};
  require(gout.shape == std::vector<int>({batch, co, out.d, out.h, out.w}),
          ErrorKind::shape_mismatch, "transposed conv gradient shape mismatch");
  const int k3 = g.kernel * g.kernel * g.kernel;

  ConvGrads<T> grads{TensorT<T>(x.shape), TensorT<T>(w.shape), TensorT<T>({co})};
  std::vector<T> cols(std::size_t(co) * k3 * in.volume());
  for (int n = 0; n < batch; ++n) {
    const T* x_n = x.data() + std::int64_t(n) * ci * in.volume();
    im2col(gout.data() + std::int64_t(n) * co * out.volume(), co, out, in, g, cols.data());
    // d/dx: gather of gout with the shared kernel
    gemm(false, false, ci, int(in.volume()), co * k3, w.data(), cols.data(), T(0),
         grads.gx.data() + std::int64_t(n) * ci * in.volume());
    // d/dw: x x cols(gout)^T
    gemm(false, true, ci, co * k3, int(in.volume()), x_n, cols.data(), T(1), grads.gw.data());
  }
  for (int n = 0; n < batch; ++n)
    for (int c = 0; c < co; ++c) {
      const T* p = gout.data() + (std::int64_t(n) * co + c) * out.volume();
      double acc = 0.0;
      for (std::int64_t i = 0; i < out.volume(); ++i) acc += double(p[i]);
      grads.gb.values[c] += T(acc);
    }
  return grads;
}

template <typename T>
TensorT<T> batchnorm3d_forward(const TensorT<T>& x, const TensorT<T>& scale,
                               const TensorT<T>& shift, TensorT<T>& running_mean,
                               TensorT<T>& running_var, bool training, bool update_running,
                               std::type_identity_t<BatchNormCache<T>*> cache, double momentum,
                               double eps) {
  require(x.shape.size() == 5, ErrorKind::shape_mismatch, "batchnorm input must be 5-D");
  const int batch = x.dim(0), channels = x.dim(1);
  const std::int64_t vol = std::int64_t(x.dim(2)) * x.dim(3) * x.dim(4);
  const std::int64_t m = batch * vol;
  require(scale.numel() == channels && shift.numel() == channels &&
              running_mean.numel() == channels && running_var.numel() == channels,
          ErrorKind::shape_mismatch, "batchnorm parameter size mismatch");

  TensorT<T> y(x.shape);
  TensorT<T> x_hat(x.shape);
  std::vector<T> inv_std(channels);

  for (int c = 0; c < channels; ++c) {
    double mean, var;
    if (training) {
      double sum = 0.0;
      for (int n = 0; n < batch; ++n) {
        const T* p = x.data() + (std::int64_t(n) * channels + c) * vol;
        for (std::int64_t i = 0; i < vol; ++i) sum += double(p[i]);
      }
      mean = sum / double(m);
      double sq = 0.0;
      for (int n = 0; n < batch; ++n) {
        const T* p = x.data() + (std::int64_t(n) * channels + c) * vol;
        for (std::int64_t i = 0; i < vol; ++i) {
          const double d = double(p[i]) - mean;
          sq += d * d;
        }
      }
      var = sq / double(m);
      if (update_running) {
        const double var_unbiased = m > 1 ? var * double(m) / double(m - 1) : var;
        running_mean.values[c] = T((1.0 - momentum) * double(running_mean.values[c]) + momentum * mean);
        running_var.values[c] = T((1.0 - momentum) * double(running_var.values[c]) + momentum * var_unbiased);
      }
    } else {
      mean = double(running_mean.values[c]);
      var = double(running_var.values[c]);
    }
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[c] = T(istd);
    const double sc = double(scale.values[c]), sh = double(shift.values[c]);
    for (int n = 0; n < batch; ++n) {
      const std::int64_t base = (std::int64_t(n) * channels + c) * vol;
      const T* p = x.data() + base;
      T* xh = x_hat.data() + base;
      T* yo = y.data() + base;
      for (std::int64_t i = 0; i < vol; ++i) {
        const double h = (double(p[i]) - mean) * istd;
        xh[i] = T(h);
        yo[i] = T(sc * h + sh);
      }
    }
  }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
    cache->training = training;
  }
  return y;
}

template <typename T>
BatchNormGrads<T> batchnorm3d_backward(const TensorT<T>& gout, const TensorT<T>& scale,
                                       const BatchNormCache<T>& cache) {
  const TensorT<T>& x_hat = cache.x_hat;
  require(same_shape(gout, x_hat), ErrorKind::shape_mismatch, "batchnorm gradient shape mismatch");
  const int batch = gout.dim(0), channels = gout.dim(1);
  const std::int64_t vol = std::int64_t(gout.dim(2)) * gout.dim(3) * gout.dim(4);
  const std::int64_t m = batch * vol;

  BatchNormGrads<T> grads{TensorT<T>(gout.shape), TensorT<T>({channels}), TensorT<T>({channels})};
  for (int c = 0; c < channels; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int n = 0; n < batch; ++n) {
      const std::int64_t base = (std::int64_t(n) * channels + c) * vol;
      const T* g = gout.data() + base;
      const T* xh = x_hat.data() + base;
      for (std::int64_t i = 0; i < vol; ++i) {
        sum_g += double(g[i]);
        sum_gx += double(g[i]) * double(xh[i]);
      }
    }
    grads.gshift.values[c] = T(sum_g);
    grads.gscale.values[c] = T(sum_gx);
    const double sc_istd = double(scale.values[c]) * double(cache.inv_std[c]);
    const double mean_g = sum_g / double(m), mean_gx = sum_gx / double(m);
    for (int n = 0; n < batch; ++n) {
      const std::int64_t base = (std::int64_t(n) * channels + c) * vol;
      const T* g = gout.data() + base;
      const T* xh = x_hat.data() + base;
      T* gx = grads.gx.data() + base;
      for (std::int64_t i = 0; i < vol; ++i) {
        // In inference mode the statistics are constants, so the
        // centering terms vanish.
        const double corr = cache.training ? mean_g + double(xh[i]) * mean_gx : 0.0;
        gx[i] = T(sc_istd * (double(g[i]) - corr));
      }
    }
  }
  return grads;
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (auto& v : y.values) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& gout, const TensorT<T>& x) {
  require(same_shape(gout, x), ErrorKind::shape_mismatch, "relu gradient shape mismatch");
  TensorT<T> gx(gout.shape);
  for (std::int64_t i = 0; i < gout.numel(); ++i)
    gx.values[i] = x.values[i] > T(0) ? gout.values[i] : T(0);
  return gx;
}

template <typename T>
TensorT<T> leaky_relu_forward(const TensorT<T>& x, T slope) {
  TensorT<T> y = x;
  for (auto& v : y.values) v = v > T(0) ? v : slope * v;
  return y;
}

template <typename T>
TensorT<T> leaky_relu_backward(const TensorT<T>& gout, const TensorT<T>& x, T slope) {
  require(same_shape(gout, x), ErrorKind::shape_mismatch, "leaky relu gradient shape mismatch");
  TensorT<T> gx(gout.shape);
  for (std::int64_t i = 0; i < gout.numel(); ++i)
    gx.values[i] = x.values[i] > T(0) ? gout.values[i] : slope * gout.values[i];
  return gx;
}

template <typename T>
TensorT<T> sigmoid_forward(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (auto& v : y.values) v = T(1) / (T(1) + std::exp(-v));
  return y;
}

template <typename T>
TensorT<T> sigmoid_backward(const TensorT<T>& gout, const TensorT<T>& y) {
  require(same_shape(gout, y), ErrorKind::shape_mismatch, "sigmoid gradient shape mismatch");
  TensorT<T> gx(gout.shape);
  for (std::int64_t i = 0; i < gout.numel(); ++i)
    gx.values[i] = gout.values[i] * y.values[i] * (T(1) - y.values[i]);
  return gx;
}

template <typename T>
TensorT<T> tanh_forward(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (auto& v : y.values) v = std::tanh(v);
  return y;
}

template <typename T>
TensorT<T> tanh_backward(const TensorT<T>& gout, const TensorT<T>& y) {
  require(same_shape(gout, y), ErrorKind::shape_mismatch, "tanh gradient shape mismatch");
  TensorT<T> gx(gout.shape);
  for (std::int64_t i = 0; i < gout.numel(); ++i)
    gx.values[i] = gout.values[i] * (T(1) - y.values[i] * y.values[i]);
  return gx;
}

template <typename T>
T mse(const TensorT<T>& a, const TensorT<T>& b) {
  require(same_shape(a, b), ErrorKind::shape_mismatch, "mse shape mismatch");
  double acc = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    const double d = double(a.values[i]) - double(b.values[i]);
    acc += d * d;
  }
  return T(acc / double(a.numel()));
}

template <typename T>
TensorT<T> mse_backward(const TensorT<T>& a, const TensorT<T>& b) {
  require(same_shape(a, b), ErrorKind::shape_mismatch, "mse shape mismatch");
  TensorT<T> g(a.shape);
  const T inv = T(2) / T(a.numel());
  for (std::int64_t i = 0; i < a.numel(); ++i) g.values[i] = inv * (a.values[i] - b.values[i]);
  return g;
}

template <typename T>
T lsgan_term(const TensorT<T>& d_out, T target) {
  double acc = 0.0;
  for (auto v : d_out.values) {
    const double d = double(v) - double(target);
    acc += d * d;
  }
  return T(acc / double(d_out.numel()));
}

template <typename T>
TensorT<T> lsgan_backward(const TensorT<T>& d_out, T target) {
  TensorT<T> g(d_out.shape);
  const T inv = T(2) / T(d_out.numel());
  for (std::int64_t i = 0; i < d_out.numel(); ++i) g.values[i] = inv * (d_out.values[i] - target);
  return g;
}

#define CGMKIT_INSTANTIATE_OPS(T)                                                                  \
  template TensorT<T> conv3d_forward<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,  \
                                        ConvGeom);                                                 \
  template ConvGrads<T> conv3d_backward<T>(const TensorT<T>&, const TensorT<T>&,                  \
                                           const TensorT<T>&, ConvGeom);                           \
  template TensorT<T> convtranspose3d_forward<T>(const TensorT<T>&, const TensorT<T>&,            \
                                                 const TensorT<T>&, ConvGeom);                     \
  template ConvGrads<T> convtranspose3d_backward<T>(const TensorT<T>&, const TensorT<T>&,         \
                                                    const TensorT<T>&, ConvGeom);                  \
  template TensorT<T> batchnorm3d_forward<T>(const TensorT<T>&, const TensorT<T>&,                \
                                             const TensorT<T>&, TensorT<T>&, TensorT<T>&, bool,   \
                                             bool, std::type_identity_t<BatchNormCache<T>*>,       \
                                             double, double);                                       \
  template BatchNormGrads<T> batchnorm3d_backward<T>(const TensorT<T>&, const TensorT<T>&,        \
                                                     const BatchNormCache<T>&);                    \
  template TensorT<T> relu_forward<T>(const TensorT<T>&);                                          \
  template TensorT<T> relu_backward<T>(const TensorT<T>&, const TensorT<T>&);                      \
  template TensorT<T> leaky_relu_forward<T>(const TensorT<T>&, T);                                 \
  template TensorT<T> leaky_relu_backward<T>(const TensorT<T>&, const TensorT<T>&, T);             \
  template TensorT<T> sigmoid_forward<T>(const TensorT<T>&);                                       \
  template TensorT<T> sigmoid_backward<T>(const TensorT<T>&, const TensorT<T>&);                   \
  template TensorT<T> tanh_forward<T>(const TensorT<T>&);                                          \
  template TensorT<T> tanh_backward<T>(const TensorT<T>&, const TensorT<T>&);                      \
  template T mse<T>(const TensorT<T>&, const TensorT<T>&);                                         \
  template TensorT<T> mse_backward<T>(const TensorT<T>&, const TensorT<T>&);                       \
  template T lsgan_term<T>(const TensorT<T>&, T);                                                  \
  template TensorT<T> lsgan_backward<T>(const TensorT<T>&, T);

CGMKIT_INSTANTIATE_OPS(float)
CGMKIT_INSTANTIATE_OPS(double)

#undef CGMKIT_INSTANTIATE_OPS

}  // namespace cgmkit::nn
