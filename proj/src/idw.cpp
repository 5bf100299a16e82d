#include "idw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cgmkit {

Cgm idw_infer(const std::vector<const Cgm*>& train_maps, const Point3& target, int k, double p) {
  require(!train_maps.empty(), ErrorKind::validation, "IDW has no training maps");
  require(k >= 1 && k <= int(train_maps.size()), ErrorKind::validation,
          "k must lie in [1, training size]");
  require(p > 0.0, ErrorKind::validation, "IDW exponent must be positive");
  const std::size_t cells = train_maps[0]->gains_db.size();
  for (const Cgm* m : train_maps)
    require(m->gains_db.size() == cells && m->nx == train_maps[0]->nx &&
                m->ny == train_maps[0]->ny && m->nz == train_maps[0]->nz,
            ErrorKind::shape_mismatch, "IDW training maps must share one grid");

  std::vector<int> idx(train_maps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> dist(train_maps.size());
  for (std::size_t i = 0; i < train_maps.size(); ++i)
    dist[i] = distance(train_maps[i]->bs, target);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist[a] < dist[b]; });

  Cgm out;
  out.bs = target;
  out.nx = train_maps[0]->nx;
  out.ny = train_maps[0]->ny;
  out.nz = train_maps[0]->nz;
  out.env_hash = train_maps[0]->env_hash;

  if (dist[idx[0]] == 0.0) {
    out.gains_db = train_maps[idx[0]]->gains_db;
    return out;
  }

  std::vector<double> weights(k);
  double weight_sum = 0.0;
  for (int n = 0; n < k; ++n) {
    weights[n] = 1.0 / std::pow(dist[idx[n]], p);
    weight_sum += weights[n];
  }
  std::vector<double> acc(cells, 0.0);
  for (int n = 0; n < k; ++n) {
    const double w = weights[n] / weight_sum;
    const auto& gains = train_maps[idx[n]]->gains_db;
    for (std::size_t c = 0; c < cells; ++c) acc[c] += w * double(gains[c]);
  }
  out.gains_db.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) out.gains_db[c] = float(acc[c]);
  return out;
}

Cgm idw_infer(const CgmDataset& ds, const Point3& target, int k, double p) {
  require(!ds.train_indices.empty(), ErrorKind::validation, "dataset has no training split");
  std::vector<Cgm> maps;
  maps.reserve(ds.train_indices.size());
  for (int i : ds.train_indices) maps.push_back(load_sample(ds, i));
  std::vector<const Cgm*> ptrs;
  ptrs.reserve(maps.size());
  for (const auto& m : maps) ptrs.push_back(&m);
  return idw_infer(ptrs, target, k, p);
}

}  // namespace cgmkit
