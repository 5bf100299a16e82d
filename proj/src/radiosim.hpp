#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "urban.hpp"

namespace cgmkit {

// Log-distance channel model with separate LOS/NLOS parameter pairs, a
// deterministic correlated shadowing field, and a floor value for cells
// inside buildings. Multipath is fixed at 0 dB: the maps are time
// averages, so fast fading is excluded by construction.
struct ChannelParams {
  double k_db_los = -40.0;
  double k_db_nlos = -50.0;
  double n_pl_los = 2.2;
  double n_pl_nlos = 3.5;
  double sigma_sh_los = 4.0;
  double sigma_sh_nlos = 8.0;
  double shadow_corr_len = 32.0;
  double gamma_min_db = -250.0;
  double gamma_clip_db = -70.0;
  double d_ref = 1.0;

  void validate() const;
};

// One base station coordinate with the dense gain tensor over the grid.
// Layout: x fastest, then y, then z (RegionSpec::linear).
struct Cgm {
  Point3 bs;
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> gains_db;
  std::array<std::uint8_t, 32> env_hash{};

  std::int64_t cell_count() const { return std::int64_t(nx) * ny * nz; }

  friend bool operator==(const Cgm&, const Cgm&) = default;
};

// True iff the open segment (a, b) passes through at least one occupied
// voxel, excluding the voxels containing the endpoints themselves.
// Symmetric in (a, b) by construction. Incremental voxel traversal.
bool los_blocked(const UrbanEnvironment& env, const Point3& a, const Point3& b);

// Deterministic zero-mean field with marginal std ~= sigma over random
// positions: value noise on a lattice spaced shadow_corr_len apart,
// trilinearly interpolated, seeded by env.shadow_seed.
double shadowing_db(const UrbanEnvironment& env, const ChannelParams& params, const Point3& q,
                    double sigma);

// Gain in dB at q for a BS at o. Floor value inside buildings; otherwise
// the LOS/NLOS branch chosen by blockage, clamped to the model range.
double gain_db(const UrbanEnvironment& env, const ChannelParams& params, const Point3& o,
               const Point3& q);

// Evaluates gain_db at every cell center. Pure function of (env, params, o).
Cgm generate_cgm(const UrbanEnvironment& env, const ChannelParams& params, const Point3& o,
                 const std::array<std::uint8_t, 32>& env_hash = {});

}  // namespace cgmkit
