#include <cmath>
#include <random>

#include "doctest.h"
#include "nn/adam.hpp"
#include "nn/ops.hpp"
#include "testutil.hpp"

using namespace cgmkit;
using DT = nn::TensorT<double>;

namespace {

constexpr double kFdStep = 1e-3;
constexpr double kGradTol = 1e-4;

double weighted_sum(const DT& out, const DT& r) {
  REQUIRE(out.shape == r.shape);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.values.size(); ++i) acc += out.values[i] * r.values[i];
  return acc;
}

// Central finite differences of a scalar-valued callable w.r.t. x.
template <typename Loss>
DT fd_grad(DT& x, Loss&& loss) {
  DT g(x.shape);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double keep = x.values[i];
    x.values[i] = keep + kFdStep;
    const double up = loss();
    x.values[i] = keep - kFdStep;
    const double down = loss();
    x.values[i] = keep;
    g.values[i] = (up - down) / (2.0 * kFdStep);
  }
  return g;
}

}  // namespace

TEST_CASE("conv3d halves spatial dims and matches the declared contract") {
  std::mt19937_64 rng(1);
  auto x = testutil::random_tensor<float>({1, 4, 32, 32, 32}, rng);
  auto w = testutil::random_tensor<float>({2, 4, 4, 4, 4}, rng);
  auto b = testutil::random_tensor<float>({2}, rng);
  auto y = nn::conv3d_forward(x, w, b);
  CHECK(y.shape == std::vector<int>({1, 2, 16, 16, 16}));

  CHECK_THROWS_AS(nn::conv3d_forward(testutil::random_tensor<float>({1, 4, 5, 5, 5}, rng), w, b),
                  Error);
  CHECK_THROWS_AS(nn::conv3d_forward(testutil::random_tensor<float>({1, 3, 8, 8, 8}, rng), w, b),
                  Error);
}

TEST_CASE("conv3d with a single-tap kernel is a strided copy") {
  std::mt19937_64 rng(2);
  auto x = testutil::random_tensor<float>({1, 1, 8, 8, 8}, rng);
  nn::Tensor w({1, 1, 4, 4, 4});
  // tap at (1,1,1): out[t] = x[2t - 1 + 1] = x[2t]
  w.values[(1 * 4 + 1) * 4 + 1] = 1.0f;
  nn::Tensor b({1});
  auto y = nn::conv3d_forward(x, w, b);
  REQUIRE(y.shape == std::vector<int>({1, 1, 4, 4, 4}));
  for (int d = 0; d < 4; ++d)
    for (int h = 0; h < 4; ++h)
      for (int v = 0; v < 4; ++v)
        CHECK(y.values[(d * 4 + h) * 4 + v] ==
              x.values[(std::size_t(2 * d) * 8 + 2 * h) * 8 + 2 * v]);
}

TEST_CASE("conv3d gradients agree with central finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed);
    auto x = testutil::random_tensor<double>({1, 2, 4, 4, 4}, rng);
    auto w = testutil::random_tensor<double>({2, 2, 4, 4, 4}, rng);
    auto b = testutil::random_tensor<double>({2}, rng);
    auto r = testutil::random_tensor<double>({1, 2, 2, 2, 2}, rng);
    auto loss = [&] { return weighted_sum(nn::conv3d_forward(x, w, b), r); };
    auto grads = nn::conv3d_backward(x, w, r);
    CHECK(testutil::max_rel_error(grads.gx, fd_grad(x, loss)) < kGradTol);
    CHECK(testutil::max_rel_error(grads.gw, fd_grad(w, loss)) < kGradTol);
    CHECK(testutil::max_rel_error(grads.gb, fd_grad(b, loss)) < kGradTol);
  }
}

TEST_CASE("convtranspose3d doubles spatial dims; five stages reach 32") {
  std::mt19937_64 rng(3);
  // paper-width generator stack: 3 -> 512 -> 256 -> 128 -> 64 -> 1
  const int ch[6] = {3, 512, 256, 128, 64, 1};
  nn::Tensor x = testutil::random_tensor<float>({1, 3, 1, 1, 1}, rng);
  int extent = 1;
  for (int stage = 0; stage < 5; ++stage) {
    auto w = testutil::random_tensor<float>({ch[stage], ch[stage + 1], 4, 4, 4}, rng, -0.05f,
                                            0.05f);
    nn::Tensor b({ch[stage + 1]});
    x = nn::convtranspose3d_forward(x, w, b);
    extent *= 2;
    REQUIRE(x.shape == std::vector<int>({1, ch[stage + 1], extent, extent, extent}));
  }
  CHECK(x.shape == std::vector<int>({1, 1, 32, 32, 32}));
}

TEST_CASE("convtranspose3d broadcasts bias over a zero input") {
  std::mt19937_64 rng(4);
  nn::Tensor x({1, 2, 2, 2, 2});
  auto w = testutil::random_tensor<float>({2, 3, 4, 4, 4}, rng);
  nn::Tensor b({3});
  b.values = {0.5f, -1.0f, 2.0f};
  auto y = nn::convtranspose3d_forward(x, w, b);
  REQUIRE(y.shape == std::vector<int>({1, 3, 4, 4, 4}));
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 64; ++i) CHECK(y.values[std::size_t(c) * 64 + i] == b.values[c]);
}

TEST_CASE("conv and its transpose satisfy the adjoint identity") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    // shared weight (co, ci, k^3): conv maps ci->co, transpose maps co->ci
    auto w = testutil::random_tensor<double>({3, 2, 4, 4, 4}, rng);
    auto x = testutil::random_tensor<double>({1, 2, 4, 4, 4}, rng);
    auto y = testutil::random_tensor<double>({1, 3, 2, 2, 2}, rng);
    const double lhs = weighted_sum(nn::conv3d_forward(x, w, DT({3})), y);
    const double rhs = weighted_sum(nn::convtranspose3d_forward(y, w, DT({2})), x);
    CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-4}) < 1e-4);
  }
}

TEST_CASE("convtranspose3d gradients agree with central finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed + 10);
    auto x = testutil::random_tensor<double>({1, 2, 2, 2, 2}, rng);
    auto w = testutil::random_tensor<double>({2, 2, 4, 4, 4}, rng);
    auto b = testutil::random_tensor<double>({2}, rng);
    auto r = testutil::random_tensor<double>({1, 2, 4, 4, 4}, rng);
    auto loss = [&] { return weighted_sum(nn::convtranspose3d_forward(x, w, b), r); };
    auto grads = nn::convtranspose3d_backward(x, w, r);
    CHECK(testutil::max_rel_error(grads.gx, fd_grad(x, loss)) < kGradTol);
    CHECK(testutil::max_rel_error(grads.gw, fd_grad(w, loss)) < kGradTol);
    CHECK(testutil::max_rel_error(grads.gb, fd_grad(b, loss)) < kGradTol);
  }
}

TEST_CASE("batchnorm normalizes per channel in training mode") {
  std::mt19937_64 rng(6);
  auto x = testutil::random_tensor<double>({4, 3, 4, 4, 4}, rng, -3.0, 5.0);
  DT scale({3}), shift({3}), mean({3}), var({3});
  scale.values = {1.0, 1.0, 1.0};
  var.values = {1.0, 1.0, 1.0};
  auto y = nn::batchnorm3d_forward(x, scale, shift, mean, var, true, true, nullptr);
  const std::int64_t m = 4 * 64;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 64; ++i) {
        const double v = y.values[(std::size_t(n) * 3 + c) * 64 + i];
        sum += v;
        sq += v * v;
      }
    CHECK(std::abs(sum / m) < 1e-3);
    CHECK(std::abs(sq / m - 1.0) < 1e-3);
    // running stats moved off their init toward the batch statistics
    CHECK(mean.values[c] != 0.0);
  }
}

TEST_CASE("batchnorm inference mode applies the running statistics") {
  DT x({1, 1, 2, 2, 2});
  x.values = {1, 2, 3, 4, 5, 6, 7, 8};
  DT scale({1}), shift({1}), mean({1}), var({1});
  scale.values = {2.0};
  shift.values = {1.0};
  mean.values = {4.5};
  var.values = {4.0};
  auto y = nn::batchnorm3d_forward(x, scale, shift, mean, var, false, false, nullptr, 0.1, 0.0);
  for (int i = 0; i < 8; ++i)
    CHECK(y.values[i] == doctest::Approx(2.0 * (x.values[i] - 4.5) / 2.0 + 1.0));
}

TEST_CASE("batchnorm gradients agree with central finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed + 20);
    auto x = testutil::random_tensor<double>({2, 2, 2, 2, 2}, rng, -2.0, 2.0);
    auto scale = testutil::random_tensor<double>({2}, rng, 0.5, 1.5);
    auto shift = testutil::random_tensor<double>({2}, rng);
    auto r = testutil::random_tensor<double>({2, 2, 2, 2, 2}, rng);
    DT mean({2}), var({2});
    var.values = {1.0, 1.0};

    for (bool training : {true, false}) {
      if (!training) {
        mean.values = {0.3, -0.2};
        var.values = {1.7, 0.6};
      }
      auto loss = [&] {
        DT m = mean, v = var;  // keep stats frozen across FD evaluations
        return weighted_sum(
            nn::batchnorm3d_forward(x, scale, shift, m, v, training, false, nullptr), r);
      };
      nn::BatchNormCache<double> cache;
      DT m = mean, v = var;
      nn::batchnorm3d_forward(x, scale, shift, m, v, training, false, &cache);
      auto grads = nn::batchnorm3d_backward(r, scale, cache);
      CHECK(testutil::max_rel_error(grads.gx, fd_grad(x, loss)) < kGradTol);
      CHECK(testutil::max_rel_error(grads.gscale, fd_grad(scale, loss)) < kGradTol);
      CHECK(testutil::max_rel_error(grads.gshift, fd_grad(shift, loss)) < kGradTol);
    }
  }
}

TEST_CASE("activation values match their definitions") {
  DT x({1, 1, 1, 1, 4});
  x.values = {-1.0, 0.0, 2.0, -0.5};
  auto relu = nn::relu_forward(x);
  CHECK(relu.values == std::vector<double>({0.0, 0.0, 2.0, 0.0}));
  auto leaky = nn::leaky_relu_forward(x, 0.2);
  CHECK(leaky.values[0] == doctest::Approx(-0.2));
  CHECK(leaky.values[2] == doctest::Approx(2.0));
  auto sig = nn::sigmoid_forward(x);
  CHECK(sig.values[1] == doctest::Approx(0.5));
  auto th = nn::tanh_forward(x);
  CHECK(th.values[1] == doctest::Approx(0.0));
  CHECK(th.values[2] == doctest::Approx(std::tanh(2.0)));
}

TEST_CASE("every activation passes the finite-difference gradient check") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed + 30);
    auto x = testutil::random_tensor<double>({2, 2, 2, 2, 2}, rng, -2.0, 2.0);
    auto r = testutil::random_tensor<double>({2, 2, 2, 2, 2}, rng);

    auto relu_loss = [&] { return weighted_sum(nn::relu_forward(x), r); };
    CHECK(testutil::max_rel_error(nn::relu_backward(r, x), fd_grad(x, relu_loss)) < kGradTol);

    auto leaky_loss = [&] { return weighted_sum(nn::leaky_relu_forward(x, 0.2), r); };
    CHECK(testutil::max_rel_error(nn::leaky_relu_backward(r, x, 0.2), fd_grad(x, leaky_loss)) <
          kGradTol);

    auto sig_loss = [&] { return weighted_sum(nn::sigmoid_forward(x), r); };
    CHECK(testutil::max_rel_error(nn::sigmoid_backward(r, nn::sigmoid_forward(x)),
                                  fd_grad(x, sig_loss)) < kGradTol);

    auto tanh_loss = [&] { return weighted_sum(nn::tanh_forward(x), r); };
    CHECK(testutil::max_rel_error(nn::tanh_backward(r, nn::tanh_forward(x)),
                                  fd_grad(x, tanh_loss)) < kGradTol);
  }
}

TEST_CASE("mse and lsgan match hand arithmetic") {
  DT a({1, 1, 1, 1, 2}), b({1, 1, 1, 1, 2});
  a.values = {0.0, 0.0};
  b.values = {2.0, 2.0};
  CHECK(nn::mse(a, a) == 0.0);
  CHECK(nn::mse(a, b) == doctest::Approx(4.0));

  DT d({1, 1, 1, 1, 1});
  d.values = {0.5};
  CHECK(nn::lsgan_term(d, 1.0) == doctest::Approx(0.25));

  // the loss-of-D arithmetic: D(real)=0.8, D(fake)=0.3 -> 0.04 + 0.09
  DT real_out({1, 1, 1, 1, 1}), fake_out({1, 1, 1, 1, 1});
  real_out.values = {0.8};
  fake_out.values = {0.3};
  CHECK(nn::lsgan_term(real_out, 1.0) + nn::lsgan_term(fake_out, 0.0) == doctest::Approx(0.13));
}

TEST_CASE("loss gradients agree with central finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed + 40);
    auto a = testutil::random_tensor<double>({1, 1, 2, 2, 2}, rng);
    auto b = testutil::random_tensor<double>({1, 1, 2, 2, 2}, rng);
    auto mse_loss = [&] { return double(nn::mse(a, b)); };
    CHECK(testutil::max_rel_error(nn::mse_backward(a, b), fd_grad(a, mse_loss)) < kGradTol);

    auto lsgan_loss = [&] { return double(nn::lsgan_term(a, 0.7)); };
    CHECK(testutil::max_rel_error(nn::lsgan_backward(a, 0.7), fd_grad(a, lsgan_loss)) < kGradTol);
  }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  nn::TensorT<float> p({4});
  p.values = {1.0f, -2.0f, 3.0f, 0.5f};
  p.ensure_grad();
  nn::AdamState<float> state;
  const auto before = p.values;
  nn::adam_step({&p}, state);
  CHECK(p.values == before);
}

TEST_CASE("adam: first step on f(w)=w^2 moves w by about lr") {
  nn::TensorT<float> w({1});
  w.values = {1.0f};
  w.ensure_grad();
  w.grad = {2.0f};  // df/dw at w=1
  nn::AdamState<float> state;
  state.lr = 2e-4f;
  nn::adam_step({&w}, state);
  // f32 storage quantizes the update; stay well inside lr itself
  CHECK(std::abs(double(w.values[0]) - (1.0 - 2e-4)) < 1e-6);
}

TEST_CASE("adam trajectories are bit-identical across runs") {
  auto run = [] {
    std::mt19937_64 rng(77);
    auto p = testutil::random_tensor<float>({32}, rng);
    nn::AdamState<float> state;
    for (int step = 0; step < 50; ++step) {
      p.ensure_grad();
      for (std::size_t i = 0; i < p.grad.size(); ++i)
        p.grad[i] = 0.1f * p.values[i] + float(i % 3);
      nn::adam_step({&p}, state);
    }
    return p.values;
  };
  CHECK(run() == run());
}

TEST_CASE("shape algebra: stride-2 stacks map 32 <-> 1") {
  std::mt19937_64 rng(8);
  nn::Tensor x = testutil::random_tensor<float>({1, 1, 32, 32, 32}, rng);
  auto w = testutil::random_tensor<float>({1, 1, 4, 4, 4}, rng);
  nn::Tensor b({1});
  for (int expected = 16; expected >= 1; expected /= 2) {
    x = nn::conv3d_forward(x, w, b);
    REQUIRE(x.dim(2) == expected);
  }
  for (int expected = 2; expected <= 32; expected *= 2) {
    x = nn::convtranspose3d_forward(x, w, b);
    REQUIRE(x.dim(2) == expected);
  }
}
