#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "grid.hpp"

namespace cgmkit {

// ITU-style urban statistics: alpha = footprint-to-area ratio, beta =
// buildings per km^2, gamma_h = Rayleigh scale of the height distribution.
// gamma_h is so named to avoid clashing with the channel gain gamma.
struct UrbanParams {
  double alpha = 0.5;
  double beta = 300.0;
  double gamma_h = 50.0;
  std::optional<int> building_count;
  std::uint64_t seed = 0;
  // Footprint side lengths in whole cells. When unset, sides are derived
  // per building so the total footprint tracks alpha.
  std::optional<int> side_cells_min;
  std::optional<int> side_cells_max;

  void validate() const;
};

struct Building {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double height = 0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool overlaps(const Building& other) const {
    return x_min < other.x_max && other.x_min < x_max && y_min < other.y_max &&
           other.y_min < y_max;
  }

  friend bool operator==(const Building&, const Building&) = default;
};

struct UrbanEnvironment {
  RegionSpec spec;
  UrbanParams params;
  std::vector<Building> buildings;
  OccupancyMask mask;
  std::uint64_t shadow_seed = 0;

  double achieved_alpha() const;
};

// Inverse-CDF Rayleigh sample: h = gamma_h * sqrt(-2 ln(1-u)). Pure
// transform of one uniform variate; callers clamp to the region height.
double sample_height(double gamma_h, double u);

// Cell occupied iff its center lies strictly inside a footprint at or
// below that building's height.
OccupancyMask rasterize(const RegionSpec& spec, const std::vector<Building>& buildings);

// Deterministic per seed. Produces params.building_count buildings when
// given, else round(beta * area_km2). Fails if placement cannot finish
// within a bounded number of rejected attempts.
UrbanEnvironment generate_environment(const RegionSpec& spec, const UrbanParams& params);

}  // namespace cgmkit
