#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace cgmkit {

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

// 1-based cell index; (1,1,1) is the corner cell at the coordinate origin.
struct CellIndex {
  int i = 1, j = 1, k = 1;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Axis-aligned region of size L x W x H metres discretized into cells of
// size (dx, dy, dz). Cell counts use per-axis ceilings, so the last cell
// along an axis may extend past the nominal region edge.
class RegionSpec {
 public:
  RegionSpec(double length, double width, double height, double dx, double dy, double dz);

  double length() const { return length_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dz() const { return dz_; }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  // Total cell count Nx*Ny*Nz.
  std::int64_t cell_count() const { return std::int64_t(nx_) * ny_ * nz_; }

  // Center of a cell: ((i-1/2)dx, (j-1/2)dy, (k-1/2)dz).
  Point3 cell_center(const CellIndex& idx) const;

  // Cell containing p. Cells are half-open boxes [a, a+delta) per axis;
  // the region's upper boundary folds into the last cell so locate is
  // total on the closed region.
  CellIndex locate(const Point3& p) const;

  bool contains(const Point3& p) const {
    return p.x >= 0.0 && p.x <= length_ && p.y >= 0.0 && p.y <= width_ && p.z >= 0.0 &&
           p.z <= height_;
  }

  bool in_bounds(const CellIndex& idx) const {
    return idx.i >= 1 && idx.i <= nx_ && idx.j >= 1 && idx.j <= ny_ && idx.k >= 1 && idx.k <= nz_;
  }

  // Linear offset with x fastest, z slowest; matches the CGM tensor layout.
  std::int64_t linear(const CellIndex& idx) const {
    return (idx.i - 1) + std::int64_t(nx_) * ((idx.j - 1) + std::int64_t(ny_) * (idx.k - 1));
  }

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;

 private:
  double length_, width_, height_;
  double dx_, dy_, dz_;
  int nx_, ny_, nz_;
};

// Dense boolean voxel tensor partitioning the region into the building set
// (true) and the free set (false). Layout matches RegionSpec::linear.
class OccupancyMask {
 public:
  OccupancyMask() = default;
  OccupancyMask(int nx, int ny, int nz) : nx_(nx), ny_(ny), nz_(nz), cells_(std::size_t(nx) * ny * nz, 0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  std::int64_t size() const { return std::int64_t(cells_.size()); }

  bool occupied(const CellIndex& idx) const { return cells_[offset(idx)] != 0; }
  void set(const CellIndex& idx, bool v) { cells_[offset(idx)] = v ? 1 : 0; }

  std::int64_t occupied_count() const;

  const std::vector<std::uint8_t>& raw() const { return cells_; }

  friend bool operator==(const OccupancyMask&, const OccupancyMask&) = default;

 private:
  std::size_t offset(const CellIndex& idx) const {
    return std::size_t(idx.i - 1) + std::size_t(nx_) * ((idx.j - 1) + std::size_t(ny_) * (idx.k - 1));
  }

  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::uint8_t> cells_;
};

}  // namespace cgmkit
