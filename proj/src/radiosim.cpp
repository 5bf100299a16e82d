#include "radiosim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "rng.hpp"
#include "runtime.hpp"

namespace cgmkit {

void ChannelParams::validate() const {
  require(n_pl_los > 0.0 && n_pl_nlos > 0.0, ErrorKind::validation,
          "path loss exponents must be positive");
  require(sigma_sh_los >= 0.0 && sigma_sh_nlos >= 0.0, ErrorKind::validation,
          "shadowing sigmas must be nonnegative");
  require(gamma_min_db < gamma_clip_db, ErrorKind::validation,
          "gamma_min_db must lie below gamma_clip_db");
  require(d_ref > 0.0, ErrorKind::validation, "d_ref must be positive");
  require(shadow_corr_len > 0.0, ErrorKind::validation, "shadow_corr_len must be positive");
}

namespace {

// Order endpoints before traversal so blockage is exactly symmetric.
bool point_less(const Point3& a, const Point3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

bool los_blocked(const UrbanEnvironment& env, const Point3& a_in, const Point3& b_in) {
  const RegionSpec& spec = env.spec;
  require(spec.contains(a_in) && spec.contains(b_in), ErrorKind::validation,
          "segment endpoints must lie inside the region");

  Point3 a = a_in, b = b_in;
  if (point_less(b, a)) std::swap(a, b);

  const CellIndex start = spec.locate(a);
  const CellIndex end = spec.locate(b);
  if (start == end) return false;

  // Amanatides-Woo: walk every voxel the segment passes through, tracking
  // the parametric distance to the next face crossing per axis.
  const double dir[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
  const double origin[3] = {a.x, a.y, a.z};
  const double delta[3] = {spec.dx(), spec.dy(), spec.dz()};
  int cell[3] = {start.i - 1, start.j - 1, start.k - 1};
  const int goal[3] = {end.i - 1, end.j - 1, end.k - 1};

  int step[3];
  double t_max[3], t_delta[3];
  for (int ax = 0; ax < 3; ++ax) {
    if (dir[ax] > 0.0) {
      step[ax] = 1;
      t_max[ax] = ((cell[ax] + 1) * delta[ax] - origin[ax]) / dir[ax];
      t_delta[ax] = delta[ax] / dir[ax];
    } else if (dir[ax] < 0.0) {
      step[ax] = -1;
      t_max[ax] = (cell[ax] * delta[ax] - origin[ax]) / dir[ax];
      t_delta[ax] = -delta[ax] / dir[ax];
    } else {
      step[ax] = 0;
      t_max[ax] = std::numeric_limits<double>::infinity();
      t_delta[ax] = std::numeric_limits<double>::infinity();
    }
  }

  const int limit[3] = {spec.nx(), spec.ny(), spec.nz()};
  // Hard cap: a straight segment can cross at most nx+ny+nz faces.
  for (int guard = limit[0] + limit[1] + limit[2] + 3; guard > 0; --guard) {
    int ax = 0;
    if (t_max[1] < t_max[ax]) ax = 1;
    if (t_max[2] < t_max[ax]) ax = 2;
    if (t_max[ax] > 1.0) break;  // next crossing is beyond b
    cell[ax] += step[ax];
    t_max[ax] += t_delta[ax];
    if (cell[ax] < 0 || cell[ax] >= limit[ax]) break;
    const bool at_goal = cell[0] == goal[0] && cell[1] == goal[1] && cell[2] == goal[2];
    if (at_goal) break;  // endpoint cells excluded from the test
    if (env.mask.occupied({cell[0] + 1, cell[1] + 1, cell[2] + 1})) return true;
  }
  return false;
}

double shadowing_db(const UrbanEnvironment& env, const ChannelParams& params, const Point3& q,
                    double sigma) {
  if (sigma == 0.0) return 0.0;
  const double cl = params.shadow_corr_len;
  const double fx = q.x / cl, fy = q.y / cl, fz = q.z / cl;
  const auto gx = static_cast<std::int64_t>(std::floor(fx));
  const auto gy = static_cast<std::int64_t>(std::floor(fy));
  const auto gz = static_cast<std::int64_t>(std::floor(fz));
  const double ux = fx - gx, uy = fy - gy, uz = fz - gz;

  double value = 0.0;
  for (int cx = 0; cx <= 1; ++cx)
    for (int cy = 0; cy <= 1; ++cy)
      for (int cz = 0; cz <= 1; ++cz) {
        const double w = (cx ? ux : 1.0 - ux) * (cy ? uy : 1.0 - uy) * (cz ? uz : 1.0 - uz);
        value += w * lattice_normal(env.shadow_seed, gx + cx, gy + cy, gz + cz);
      }
  // Trilinear blending of unit normals shrinks the pooled variance by
  // E[sum w^2] = (2/3)^3; rescale so the marginal std over random q is sigma.
  constexpr double kBlendStd = 0.54433105395181735616;  // (2/3)^(3/2)
  return sigma / kBlendStd * value;
}

double gain_db(const UrbanEnvironment& env, const ChannelParams& params, const Point3& o,
               const Point3& q) {
  const RegionSpec& spec = env.spec;
  require(spec.contains(o), ErrorKind::validation, "BS position outside region");
  require(!env.mask.occupied(spec.locate(o)), ErrorKind::validation,
          "BS position lies inside a building");
  require(spec.contains(q), ErrorKind::validation, "query position outside region");

  if (env.mask.occupied(spec.locate(q))) return params.gamma_min_db;

  const bool blocked = los_blocked(env, o, q);
  const double k_db = blocked ? params.k_db_nlos : params.k_db_los;
  const double n_pl = blocked ? params.n_pl_nlos : params.n_pl_los;
  const double sigma = blocked ? params.sigma_sh_nlos : params.sigma_sh_los;

  const double d = std::max(distance(o, q), params.d_ref);
  const double g = k_db - 10.0 * n_pl * std::log10(d) + shadowing_db(env, params, q, sigma);
  return std::clamp(g, params.gamma_min_db, params.gamma_clip_db);
}

Cgm generate_cgm(const UrbanEnvironment& env, const ChannelParams& params, const Point3& o,
                 const std::array<std::uint8_t, 32>& env_hash) {
  params.validate();
  const RegionSpec& spec = env.spec;
  Cgm cgm;
  cgm.bs = o;
  cgm.nx = spec.nx();
  cgm.ny = spec.ny();
  cgm.nz = spec.nz();
  cgm.env_hash = env_hash;
  cgm.gains_db.resize(static_cast<std::size_t>(spec.cell_count()));

  auto fill_slab = [&](int k_begin, int k_end) {
    for (int k = k_begin; k < k_end; ++k)
      for (int j = 1; j <= spec.ny(); ++j)
        for (int i = 1; i <= spec.nx(); ++i) {
          const CellIndex idx{i, j, k};
          cgm.gains_db[spec.linear(idx)] =
              static_cast<float>(gain_db(env, params, o, spec.cell_center(idx)));
        }
  };

  // Cells are independent, so slab-parallel evaluation is bit-identical
  // to the serial pass.
  const int workers = std::min(thread_count(), spec.nz());
  if (workers <= 1) {
    fill_slab(1, spec.nz() + 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int per = (spec.nz() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = 1 + w * per;
      const int hi = std::min(lo + per, spec.nz() + 1);
      if (lo < hi) pool.emplace_back(fill_slab, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return cgm;
}

}  // namespace cgmkit
