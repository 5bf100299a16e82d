#include "urban.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "rng.hpp"

using namespace cgmkit;

namespace {

double rayleigh_cdf(double h, double gamma_h) {
  return 1.0 - std::exp(-h * h / (2.0 * gamma_h * gamma_h));
}

}  // namespace

TEST_CASE("rayleigh inverse-CDF sampler hits known quantiles") {
  CHECK(sample_height(50.0, 1e-12) == doctest::Approx(0.0).epsilon(1e-3));
  // u = CDF(gamma) = 1 - exp(-1/2) maps back to h = gamma
  CHECK(sample_height(50.0, 1.0 - std::exp(-0.5)) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(sample_height(50.0, 0.0), Error);
  CHECK_THROWS_AS(sample_height(50.0, 1.0), Error);
  CHECK_THROWS_AS(sample_height(-1.0, 0.5), Error);
}

TEST_CASE("rayleigh sampler matches the distribution empirically") {
  const double gamma_h = 50.0;
  const int n = 100000;
  std::mt19937_64 rng(42);
  std::vector<double> samples(n);
  double sum = 0.0;
  for (auto& s : samples) {
    s = sample_height(gamma_h, open_unit(rng));
    sum += s;
  }
  // Rayleigh mean = gamma * sqrt(pi/2)
  const double expected_mean = gamma_h * std::sqrt(3.14159265358979323846 / 2.0);
  CHECK(std::abs(sum / n - expected_mean) / expected_mean < 0.02);

  // Kolmogorov-Smirnov against the closed-form CDF
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = rayleigh_cdf(samples[i], gamma_h);
    ks = std::max(ks, std::abs(cdf - double(i + 1) / n));
    ks = std::max(ks, std::abs(cdf - double(i) / n));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("rasterize marks centers strictly inside footprints up to the height") {
  RegionSpec spec(256, 256, 128, 8, 8, 4);

  CHECK(rasterize(spec, {}).occupied_count() == 0);

  // one building over cells (1..4, 1..4), height covering k = 1..8
  Building b{0.0, 0.0, 32.0, 32.0, 32.0};
  OccupancyMask mask = rasterize(spec, {b});
  CHECK(mask.occupied_count() == 4 * 4 * 8);
  CHECK(mask.occupied({1, 1, 1}));
  CHECK(mask.occupied({4, 4, 8}));
  CHECK_FALSE(mask.occupied({5, 1, 1}));
  CHECK_FALSE(mask.occupied({1, 1, 9}));

  Building all{0.0, 0.0, 256.0, 256.0, 128.0};
  CHECK(rasterize(spec, {all}).occupied_count() == spec.cell_count());
}

TEST_CASE("generate_environment is deterministic and seed-sensitive") {
  RegionSpec spec(256, 256, 128, 8, 8, 4);
  UrbanParams params;
  params.alpha = 0.5;
  params.beta = 300.0;
  params.gamma_h = 50.0;
  params.building_count = 20;
  params.seed = 11;

  UrbanEnvironment a = generate_environment(spec, params);
  UrbanEnvironment b = generate_environment(spec, params);
  CHECK(a.buildings.size() == 20);
  CHECK(a.buildings == b.buildings);
  CHECK(a.mask == b.mask);
  CHECK(a.shadow_seed == b.shadow_seed);

  params.seed = 12;
  UrbanEnvironment c = generate_environment(spec, params);
  CHECK(a.buildings != c.buildings);
}

TEST_CASE("degenerate environments") {
  RegionSpec spec(128, 128, 64, 8, 8, 4);
  UrbanParams params;
  params.building_count = 0;
  UrbanEnvironment env = generate_environment(spec, params);
  CHECK(env.buildings.empty());
  CHECK(env.mask.occupied_count() == 0);
}

TEST_CASE("buildings stay inside the region, never overlap, respect H") {
  RegionSpec spec(256, 256, 128, 8, 8, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    UrbanParams params;
    params.seed = seed;
    UrbanEnvironment env = generate_environment(spec, params);
    for (std::size_t i = 0; i < env.buildings.size(); ++i) {
      const Building& b = env.buildings[i];
      CHECK(b.x_min < b.x_max);
      CHECK(b.y_min < b.y_max);
      CHECK(b.x_min >= 0.0);
      CHECK(b.y_min >= 0.0);
      CHECK(b.x_max <= spec.length());
      CHECK(b.y_max <= spec.width());
      CHECK(b.height > 0.0);
      CHECK(b.height <= spec.height());
      for (std::size_t j = i + 1; j < env.buildings.size(); ++j)
        CHECK_FALSE(b.overlaps(env.buildings[j]));
    }
  }
}

TEST_CASE("achieved footprint ratio tracks alpha without a count override") {
  RegionSpec spec(256, 256, 128, 8, 8, 4);
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    UrbanParams params;
    params.alpha = 0.5;
    params.seed = seed;
    UrbanEnvironment env = generate_environment(spec, params);
    CHECK(std::abs(env.achieved_alpha() - params.alpha) <= 0.05);
  }
}

TEST_CASE("mask is derivable from the building list") {
  RegionSpec spec(256, 256, 128, 8, 8, 4);
  UrbanParams params;
  params.seed = 5;
  UrbanEnvironment env = generate_environment(spec, params);
  CHECK(env.mask == rasterize(spec, env.buildings));
}
