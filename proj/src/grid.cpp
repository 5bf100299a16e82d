#include "grid.hpp"

#include <algorithm>
#include <numeric>

namespace cgmkit {

namespace {

int cells_along(double extent, double delta) {
  return std::max(1, static_cast<int>(std::ceil(extent / delta - 1e-12)));
}

}  // namespace

RegionSpec::RegionSpec(double length, double width, double height, double dx, double dy, double dz)
    : length_(length), width_(width), height_(height), dx_(dx), dy_(dy), dz_(dz) {
  require(length > 0.0 && width > 0.0 && height > 0.0, ErrorKind::validation,
          "region dimensions must be strictly positive");
  require(dx > 0.0 && dy > 0.0 && dz > 0.0, ErrorKind::validation,
          "cell sizes must be strictly positive");
  nx_ = cells_along(length_, dx_);
  ny_ = cells_along(width_, dy_);
  nz_ = cells_along(height_, dz_);
}

Point3 RegionSpec::cell_center(const CellIndex& idx) const {
  require(in_bounds(idx), ErrorKind::validation, "cell index out of bounds");
  return {(idx.i - 0.5) * dx_, (idx.j - 0.5) * dy_, (idx.k - 0.5) * dz_};
}

CellIndex RegionSpec::locate(const Point3& p) const {
  require(contains(p), ErrorKind::validation, "point outside region");
  auto axis = [](double v, double delta, int n) {
    int c = static_cast<int>(std::floor(v / delta)) + 1;
    return std::clamp(c, 1, n);
  };
  return {axis(p.x, dx_, nx_), axis(p.y, dy_, ny_), axis(p.z, dz_, nz_)};
}

std::int64_t OccupancyMask::occupied_count() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0},
                         [](std::int64_t acc, std::uint8_t v) { return acc + (v != 0); });
}

}  // namespace cgmkit
