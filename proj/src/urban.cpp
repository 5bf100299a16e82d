#include "urban.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace cgmkit {

void UrbanParams::validate() const {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::validation, "alpha must lie in (0,1)");
  require(beta > 0.0, ErrorKind::validation, "beta must be positive");
  require(gamma_h > 0.0, ErrorKind::validation, "gamma_h must be positive");
  if (building_count) {
    require(*building_count >= 0, ErrorKind::validation, "building_count must be >= 0");
  }
  if (side_cells_min || side_cells_max) {
    require(side_cells_min && side_cells_max, ErrorKind::validation,
            "side cell range needs both bounds");
    require(*side_cells_min >= 1 && *side_cells_max >= *side_cells_min, ErrorKind::validation,
            "invalid side cell range");
  }
}

double UrbanEnvironment::achieved_alpha() const {
  double total = 0.0;
  for (const auto& b : buildings) total += b.area();
  return total / (spec.length() * spec.width());
}

double sample_height(double gamma_h, double u) {
  require(gamma_h > 0.0, ErrorKind::validation, "gamma_h must be positive");
  require(u > 0.0 && u < 1.0, ErrorKind::validation, "u must lie in the open interval (0,1)");
  return gamma_h * std::sqrt(-2.0 * std::log1p(-u));
}

OccupancyMask rasterize(const RegionSpec& spec, const std::vector<Building>& buildings) {
  OccupancyMask mask(spec.nx(), spec.ny(), spec.nz());
  for (const auto& b : buildings) {
    // Center (i-1/2)dx is strictly inside (x_min, x_max) iff
    // x_min/dx < i-1/2 < x_max/dx; solve for the 1-based index range.
    int i_lo = static_cast<int>(std::floor(b.x_min / spec.dx() + 0.5)) + 1;
    int i_hi = static_cast<int>(std::ceil(b.x_max / spec.dx() - 0.5));
    int j_lo = static_cast<int>(std::floor(b.y_min / spec.dy() + 0.5)) + 1;
    int j_hi = static_cast<int>(std::ceil(b.y_max / spec.dy() - 0.5));
    int k_hi = static_cast<int>(std::floor(b.height / spec.dz() + 0.5));
    i_lo = std::max(i_lo, 1);
    j_lo = std::max(j_lo, 1);
    i_hi = std::min(i_hi, spec.nx());
    j_hi = std::min(j_hi, spec.ny());
    k_hi = std::min(k_hi, spec.nz());
    for (int k = 1; k <= k_hi; ++k)
      for (int j = j_lo; j <= j_hi; ++j)
        for (int i = i_lo; i <= i_hi; ++i) mask.set({i, j, k}, true);
  }
  return mask;
}

namespace {

struct CellRect {
  int ci, cj, w, h;  // 0-based cell origin and extent

  bool overlaps(const CellRect& o) const {
    return ci < o.ci + o.w && o.ci < ci + w && cj < o.cj + o.h && o.cj < cj + h;
  }
};

constexpr int kMaxFailedAttempts = 10000;
constexpr int kEnumerateAfter = 200;

bool fits(const CellRect& r, const std::vector<CellRect>& placed) {
  return std::none_of(placed.begin(), placed.end(),
                      [&](const CellRect& p) { return r.overlaps(p); });
}

// All non-overlapping origins for a w x h rectangle; used as a fallback
// when random rejection keeps missing at high fill ratios.
std::vector<std::pair<int, int>> free_origins(int nx, int ny, int w, int h,
                                              const std::vector<CellRect>& placed) {
  std::vector<std::pair<int, int>> out;
  for (int cj = 0; cj + h <= ny; ++cj)
    for (int ci = 0; ci + w <= nx; ++ci)
      if (fits({ci, cj, w, h}, placed)) out.emplace_back(ci, cj);
  return out;
}

}  // namespace

UrbanEnvironment generate_environment(const RegionSpec& spec, const UrbanParams& params) {
  params.validate();

  const double area_km2 = spec.length() * spec.width() * 1e-6;
  const int count = params.building_count
                        ? *params.building_count
                        : static_cast<int>(std::llround(params.beta * area_km2));

  auto placement_rng = make_rng(params.seed, Stream::placement);
  auto height_rng = make_rng(params.seed, Stream::heights);

  std::vector<CellRect> placed;
  placed.reserve(count);

  const double target_area = params.alpha * spec.length() * spec.width();
  const double cell_area = spec.dx() * spec.dy();
  double placed_area = 0.0;
  int failed_attempts = 0;

  auto draw_sides = [&](int remaining) -> std::pair<int, int> {
    if (params.side_cells_min) {
      std::uniform_int_distribution<int> side(*params.side_cells_min, *params.side_cells_max);
      int w = side(placement_rng), h = side(placement_rng);
      return {std::min(w, spec.nx()), std::min(h, spec.ny())};
    }
    // Track the remaining alpha deficit so late buildings absorb the
    // snapping error of earlier ones.
    double want = std::max(target_area - placed_area, cell_area) / remaining;
    double side_m = std::sqrt(want);
    std::uniform_real_distribution<double> jitter(0.85, 1.15);
    int w = std::clamp(static_cast<int>(std::llround(side_m * jitter(placement_rng) / spec.dx())),
                       1, spec.nx());
    int h = std::clamp(static_cast<int>(std::llround(side_m * jitter(placement_rng) / spec.dy())),
                       1, spec.ny());
    return {w, h};
  };

  for (int b = 0; b < count; ++b) {
    const int remaining = count - b;
    auto [w, h] = draw_sides(remaining);
    int consecutive = 0;
    bool done = false;
    while (!done) {
      if (consecutive >= kEnumerateAfter) {
        auto origins = free_origins(spec.nx(), spec.ny(), w, h, placed);
        if (origins.empty()) {
          // No room at this size anywhere; shrink the larger side.
          if (w >= h && w > 1)
            --w;
          else if (h > 1)
            --h;
          else
            fail(ErrorKind::validation, "building placement failed: region too crowded");
          consecutive = 0;
          continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, origins.size() - 1);
        auto [ci, cj] = origins[pick(placement_rng)];
        placed.push_back({ci, cj, w, h});
        done = true;
        break;
      }
      std::uniform_int_distribution<int> px(0, spec.nx() - w), py(0, spec.ny() - h);
      CellRect r{px(placement_rng), py(placement_rng), w, h};
      if (fits(r, placed)) {
        placed.push_back(r);
        done = true;
      } else {
        ++consecutive;
        require(++failed_attempts < kMaxFailedAttempts, ErrorKind::validation,
                "building placement failed: region too crowded");
      }
    }
    placed_area += double(w) * h * cell_area;
  }

  UrbanEnvironment env{spec, params, {}, {}, derive_seed(params.seed, Stream::shadow)};
  env.buildings.reserve(placed.size());
  for (const auto& r : placed) {
    double u = open_unit(height_rng);
    double height = std::min(sample_height(params.gamma_h, u), spec.height());
    env.buildings.push_back({r.ci * spec.dx(), r.cj * spec.dy(), (r.ci + r.w) * spec.dx(),
                             (r.cj + r.h) * spec.dy(), height});
  }
  env.mask = rasterize(spec, env.buildings);
  return env;
}

}  // namespace cgmkit
