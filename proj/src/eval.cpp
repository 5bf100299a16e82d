#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace cgmkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_aligned(const std::vector<const Cgm*>& truth, const std::vector<const Cgm*>& inferred) {
  require(!truth.empty() && truth.size() == inferred.size(), ErrorKind::validation,
          "AMSE needs equally sized, nonempty map lists");
  for (std::size_t m = 0; m < truth.size(); ++m) {
    require(truth[m]->gains_db.size() == inferred[m]->gains_db.size() &&
                truth[m]->nx == inferred[m]->nx && truth[m]->ny == inferred[m]->ny &&
                truth[m]->nz == inferred[m]->nz,
            ErrorKind::shape_mismatch, "AMSE map shapes differ");
    require(truth[m]->bs == inferred[m]->bs, ErrorKind::validation,
            "AMSE lists are not aligned by BS coordinate");
  }
}

std::vector<Cgm> load_split(const CgmDataset& ds, const std::vector<int>& indices,
                            const RegionSpec& spec) {
  std::vector<Cgm> maps;
  maps.reserve(indices.size());
  for (int i : indices) maps.push_back(load_sample(ds, i, &spec));
  return maps;
}

std::vector<const Cgm*> as_ptrs(const std::vector<Cgm>& maps) {
  std::vector<const Cgm*> out;
  out.reserve(maps.size());
  for (const auto& m : maps) out.push_back(&m);
  return out;
}

struct GanEval {
  AmseValue amse;
  std::vector<Cgm> inferred;
};

GanEval eval_gan(const GanModel& model, const std::vector<Cgm>& truth,
                 const OccupancyMask& mask) {
  GanEval out;
  out.inferred.reserve(truth.size());
  for (const auto& t : truth) out.inferred.push_back(infer(model, t.bs));
  out.amse = amse_split(as_ptrs(truth), as_ptrs(out.inferred), mask);
  return out;
}

// Classic piecewise-linear heat ramp on t in [0,1].
void ramp_color(double t, std::uint8_t rgb[3]) {
  t = std::clamp(t, 0.0, 1.0);
  auto channel = [](double v) { return std::uint8_t(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5); };
  rgb[0] = channel(1.5 - std::abs(4.0 * t - 3.0));
  rgb[1] = channel(1.5 - std::abs(4.0 * t - 2.0));
  rgb[2] = channel(1.5 - std::abs(4.0 * t - 1.0));
}

std::uintmax_t file_bytes(const std::string& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  require(!ec, ErrorKind::io, "cannot stat file: " + path);
  return size;
}

}  // namespace

double amse(const std::vector<const Cgm*>& truth, const std::vector<const Cgm*>& inferred) {
  check_aligned(truth, inferred);
  double acc = 0.0;
  std::int64_t cells = 0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const auto& a = truth[m]->gains_db;
    const auto& b = inferred[m]->gains_db;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = double(a[c]) - double(b[c]);
      acc += d * d;
    }
    cells += std::int64_t(a.size());
  }
  return acc / double(cells);
}

AmseValue amse_split(const std::vector<const Cgm*>& truth,
                     const std::vector<const Cgm*>& inferred, const OccupancyMask& mask) {
  check_aligned(truth, inferred);
  require(std::int64_t(truth[0]->gains_db.size()) == mask.size(), ErrorKind::shape_mismatch,
          "mask does not match map shape");
  double acc_all = 0.0, acc_free = 0.0;
  std::int64_t n_all = 0, n_free = 0;
  const auto& raw = mask.raw();
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const auto& a = truth[m]->gains_db;
    const auto& b = inferred[m]->gains_db;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = double(a[c]) - double(b[c]);
      acc_all += d * d;
      if (!raw[c]) {
        acc_free += d * d;
        ++n_free;
      }
    }
    n_all += std::int64_t(a.size());
  }
  AmseValue out;
  out.all = acc_all / double(n_all);
  out.free_only = n_free > 0 ? acc_free / double(n_free) : 0.0;
  return out;
}

std::vector<KSweepRow> k_sweep(const CgmDataset& ds, const std::vector<int>& k_values, double p) {
  require(!k_values.empty(), ErrorKind::validation, "k sweep needs at least one k");
  require(!ds.test_indices.empty(), ErrorKind::validation, "dataset has no test split");
  const EnvironmentFile envf = load_dataset_environment(ds);
  const std::vector<Cgm> truth = load_split(ds, ds.test_indices, envf.env.spec);
  const std::vector<Cgm> train = load_split(ds, ds.train_indices, envf.env.spec);
  const auto train_ptrs = as_ptrs(train);

  std::vector<KSweepRow> rows;
  rows.reserve(k_values.size());
  for (int k : k_values) {
    std::vector<Cgm> inferred;
    inferred.reserve(truth.size());
    for (const auto& t : truth) inferred.push_back(idw_infer(train_ptrs, t.bs, k, p));
    const AmseValue v = amse_split(as_ptrs(truth), as_ptrs(inferred), envf.env.mask);
    rows.push_back({k, v.all, v.free_only});
  }
  return rows;
}

std::vector<SizeSweepRow> size_sweep(const CgmDataset& ds, const GanModel& reference_model,
                                     const std::vector<int>& sizes,
                                     const std::vector<int>& k_values, double p,
                                     std::uint64_t seed) {
  require(!sizes.empty(), ErrorKind::validation, "size sweep needs at least one size");
  const EnvironmentFile envf = load_dataset_environment(ds);
  const std::vector<Cgm> truth = load_split(ds, ds.test_indices, envf.env.spec);

  std::vector<SizeSweepRow> rows;
  for (int size : sizes) {
    const CgmDataset subset = split_dataset(ds, size, seed);
    GanModel model =
        build_gan_model(reference_model.side, reference_model.norm, reference_model.hyper);
    train(model, subset);
    const GanEval gan = eval_gan(model, truth, envf.env.mask);

    const std::vector<Cgm> train_maps = load_split(subset, subset.train_indices, envf.env.spec);
    const auto train_ptrs = as_ptrs(train_maps);
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k : k_values) {
      if (k > int(train_ptrs.size())) continue;
      std::vector<Cgm> inferred;
      inferred.reserve(truth.size());
      for (const auto& t : truth) inferred.push_back(idw_infer(train_ptrs, t.bs, k, p));
      const double v = amse(as_ptrs(truth), as_ptrs(inferred));
      if (v < best) {
        best = v;
        best_k = k;
      }
    }
    require(best_k > 0, ErrorKind::validation, "size sweep found no feasible k");
    rows.push_back({size, gan.amse.all, best, best_k});
  }
  return rows;
}

void export_slices(const Cgm& cgm, const RegionSpec& spec, char axis, double position,
                   double gain_min_db, double gain_max_db, const std::string& out_prefix) {
  require(cgm.nx == spec.nx() && cgm.ny == spec.ny() && cgm.nz == spec.nz(),
          ErrorKind::shape_mismatch, "map does not match the region grid");
  require(gain_min_db < gain_max_db, ErrorKind::validation, "bad color ramp range");

  int n_axis, rows, cols;
  double delta;
  switch (axis) {
    case 'x': n_axis = spec.nx(); rows = spec.nz(); cols = spec.ny(); delta = spec.dx(); break;
    case 'y': n_axis = spec.ny(); rows = spec.nz(); cols = spec.nx(); delta = spec.dy(); break;
    case 'z': n_axis = spec.nz(); rows = spec.ny(); cols = spec.nx(); delta = spec.dz(); break;
    default: fail(ErrorKind::validation, "axis must be one of x, y, z");
  }

  // Nearest cell center along the axis; ties go to the lower layer.
  int layer = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 1; c <= n_axis; ++c) {
    const double center = (c - 0.5) * delta;
    const double d = std::abs(center - position);
    if (d < best - 1e-12) {
      best = d;
      layer = c;
    }
  }

  auto value_at = [&](int row, int col) {
    CellIndex idx;
    switch (axis) {
      case 'x': idx = {layer, col, row}; break;
      case 'y': idx = {col, layer, row}; break;
      default: idx = {col, row, layer}; break;
    }
    return cgm.gains_db[spec.linear(idx)];
  };

  std::ofstream csv(out_prefix + ".csv");
  require(csv.good(), ErrorKind::io, "cannot write " + out_prefix + ".csv");
  csv.precision(9);
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= cols; ++c) {
      if (c > 1) csv << ',';
      csv << value_at(r, c);
    }
    csv << '\n';
  }
  require(csv.good(), ErrorKind::io, "write failed: " + out_prefix + ".csv");
  csv.close();

  std::ofstream ppm(out_prefix + ".ppm", std::ios::binary);
  require(ppm.good(), ErrorKind::io, "cannot write " + out_prefix + ".ppm");
  ppm << "P6\n" << cols << " " << rows << "\n255\n";
  for (int r = 1; r <= rows; ++r)
    for (int c = 1; c <= cols; ++c) {
      const double t = (double(value_at(r, c)) - gain_min_db) / (gain_max_db - gain_min_db);
      std::uint8_t rgb[3];
      ramp_color(t, rgb);
      ppm.write(reinterpret_cast<const char*>(rgb), 3);
    }
  require(ppm.good(), ErrorKind::io, "write failed: " + out_prefix + ".ppm");
}

void eval_run(const CgmDataset& ds, const GanModel& model, const std::string& ckpt_path,
              const EvalConfig& cfg, const std::string& out_dir) {
  require(!cfg.k_values.empty(), ErrorKind::validation, "eval needs a k sweep range");
  require(model.env_hash == ds.env_hash, ErrorKind::hash_mismatch,
          "checkpoint was trained on a different environment");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorKind::io, "cannot create eval output directory: " + out_dir);

  const EnvironmentFile envf = load_dataset_environment(ds);
  const std::vector<Cgm> truth = load_split(ds, ds.test_indices, envf.env.spec);

  const GanEval gan = eval_gan(model, truth, envf.env.mask);
  const std::vector<KSweepRow> idw_rows = k_sweep(ds, cfg.k_values, cfg.idw_p);
  const KSweepRow& idw_best = *std::min_element(
      idw_rows.begin(), idw_rows.end(),
      [](const KSweepRow& a, const KSweepRow& b) { return a.amse_all < b.amse_all; });

  std::vector<SizeSweepRow> sweep;
  if (!cfg.sweep_sizes.empty())
    sweep = size_sweep(ds, model, cfg.sweep_sizes, cfg.k_values, cfg.idw_p, cfg.seed);

  {
    std::ofstream csv(fs::path(out_dir) / "k_sweep.csv");
    require(csv.good(), ErrorKind::io, "cannot write k_sweep.csv");
    csv.precision(12);
    csv << "k,amse_all_db2,amse_free_db2\n";
    for (const auto& r : idw_rows) csv << r.k << ',' << r.amse_all << ',' << r.amse_free << '\n';
  }
  if (!sweep.empty()) {
    std::ofstream csv(fs::path(out_dir) / "size_sweep.csv");
    require(csv.good(), ErrorKind::io, "cannot write size_sweep.csv");
    csv.precision(12);
    csv << "train_count,amse_gan_db2,amse_idw_best_db2,idw_best_k\n";
    for (const auto& r : sweep)
      csv << r.train_count << ',' << r.amse_gan << ',' << r.amse_idw_best << ',' << r.idw_best_k
          << '\n';
  }

  std::uintmax_t dataset_bytes = 0;
  for (const auto& s : ds.samples) dataset_bytes += file_bytes((fs::path(ds.dir) / s.path).string());
  const std::uintmax_t ckpt_bytes = file_bytes(ckpt_path);

  json report;
  report["env_hash"] = to_hex(ds.env_hash);
  report["config"] = {{"k_values", cfg.k_values},
                      {"idw_p", cfg.idw_p},
                      {"sweep_sizes", cfg.sweep_sizes},
                      {"seed", cfg.seed}};
  report["dataset"] = {{"samples", ds.samples.size()},
                       {"train_count", ds.train_indices.size()},
                       {"test_count", ds.test_indices.size()},
                       {"bytes", dataset_bytes}};
  json trace = json::array();
  for (const auto& e : model.loss_trace) trace.push_back({e.d_loss, e.g_loss, e.recon});
  report["gan"] = {{"amse_all_db2", gan.amse.all},
                   {"amse_free_db2", gan.amse.free_only},
                   {"parameter_count", parameter_count(model)},
                   {"best_epoch", model.best_epoch},
                   {"trained_count", model.trained_count},
                   {"loss_trace", trace}};
  json idw_table = json::array();
  for (const auto& r : idw_rows) idw_table.push_back({r.k, r.amse_all, r.amse_free});
  report["idw"] = {{"p", cfg.idw_p},
                   {"table", idw_table},
                   {"best", {{"k", idw_best.k}, {"amse_all_db2", idw_best.amse_all}}}};
  json sweep_rows = json::array();
  for (const auto& r : sweep)
    sweep_rows.push_back({r.train_count, r.amse_gan, r.amse_idw_best, r.idw_best_k});
  report["size_sweep"] = sweep_rows;
  report["storage"] = {{"dataset_bytes", dataset_bytes},
                       {"checkpoint_bytes", ckpt_bytes},
                       {"ratio", double(ckpt_bytes) / double(dataset_bytes)}};
  write_file((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
}

}  // namespace cgmkit
