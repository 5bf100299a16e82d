#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "nn/tensor.hpp"

namespace testutil {

// Scratch directory wiped on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("cgmkit_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

template <typename T>
cgmkit::nn::TensorT<T> random_tensor(std::vector<int> shape, std::mt19937_64& rng, T lo = T(-1),
                                     T hi = T(1)) {
  cgmkit::nn::TensorT<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist{double(lo), double(hi)};
  for (auto& v : t.values) v = T(dist(rng));
  return t;
}

// Max elementwise relative error with an absolute floor for tiny values.
template <typename T>
double max_rel_error(const cgmkit::nn::TensorT<T>& a, const cgmkit::nn::TensorT<T>& b,
                     double floor = 1e-2) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = double(a.values[i]), y = double(b.values[i]);
    const double denom = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / denom);
  }
  return worst;
}

}  // namespace testutil
