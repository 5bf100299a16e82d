#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgan.hpp"
#include "dataset.hpp"
#include "idw.hpp"

namespace cgmkit {

struct AmseValue {
  double all = 0.0;        // every grid cell, buildings included
  double free_only = 0.0;  // free-set cells only
};

// Mean of squared dB differences over maps and all grid cells. Lists must
// be aligned by BS coordinate.
double amse(const std::vector<const Cgm*>& truth, const std::vector<const Cgm*>& inferred);

AmseValue amse_split(const std::vector<const Cgm*>& truth,
                     const std::vector<const Cgm*>& inferred, const OccupancyMask& mask);

struct KSweepRow {
  int k = 0;
  double amse_all = 0.0;
  double amse_free = 0.0;
};

// IDW over the test split for each k; smallest amse_all wins best-k.
std::vector<KSweepRow> k_sweep(const CgmDataset& ds, const std::vector<int>& k_values, double p);

struct SizeSweepRow {
  int train_count = 0;
  double amse_gan = 0.0;
  double amse_idw_best = 0.0;
  int idw_best_k = 0;
};

// Retrains the GAN per training-set size on a seeded subset (test set
// fixed) and evaluates both methods on the same subset.
std::vector<SizeSweepRow> size_sweep(const CgmDataset& ds, const GanModel& reference_model,
                                     const std::vector<int>& sizes,
                                     const std::vector<int>& k_values, double p,
                                     std::uint64_t seed);

// Extracts the voxel plane nearest `position` along `axis` ('x','y','z');
// writes <prefix>.ppm (linear dB-to-color ramp over the normalizer range)
// and <prefix>.csv (raw dB values).
void export_slices(const Cgm& cgm, const RegionSpec& spec, char axis, double position,
                   double gain_min_db, double gain_max_db, const std::string& out_prefix);

struct EvalConfig {
  std::vector<int> k_values;       // default 1..12
  double idw_p = 2.0;
  std::vector<int> sweep_sizes;    // empty = skip the size sweep
  std::uint64_t seed = 1;
};

// Full comparative evaluation: GAN AMSE on the test split, the IDW k
// sweep, the optional size sweep, CSV tables, and report.json. The report
// is a pure function of the saved artifacts.
void eval_run(const CgmDataset& ds, const GanModel& model, const std::string& ckpt_path,
              const EvalConfig& cfg, const std::string& out_dir);

}  // namespace cgmkit
