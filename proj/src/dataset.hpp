#pragma once

#include <string>
#include <vector>

#include "env_io.hpp"

namespace cgmkit {

enum class BsType { gbs, sbs, abs };

std::string to_string(BsType t);
BsType bs_type_from_string(const std::string& s);

struct BsMix {
  double gbs = 0.4;
  double sbs = 0.3;
  double abs = 0.3;
};

struct CgmSample {
  Point3 bs;
  BsType type = BsType::gbs;
  std::string path;  // relative to the dataset directory
};

// The CGM corpus: an ordered sample list plus the train/test split. Test
// indices are fixed when the dataset is built; re-splitting only redraws
// the training subset.
struct CgmDataset {
  std::string dir;
  std::string env_file = "env.json";
  Sha256 env_hash{};
  std::uint64_t seed = 0;
  std::vector<CgmSample> samples;
  std::vector<int> test_indices;
  std::vector<int> train_indices;
};

// BS positions snapped to free-cell centers. GBS: bottom layer. SBS: free
// cells face-adjacent to an occupied cell. ABS: free cells whose center
// lies above the median building height. Deterministic per seed.
std::vector<std::pair<Point3, BsType>> sample_bs_locations(const UrbanEnvironment& env, int count,
                                                           const BsMix& mix, std::uint64_t seed);

// Generates one CGM per location, writes the per-map files, the copied
// environment file, and the manifest into out_dir.
CgmDataset build_dataset(const EnvironmentFile& env_file,
                         const std::vector<std::pair<Point3, BsType>>& locations,
                         const std::string& out_dir, int test_count, std::uint64_t seed);

// Redraws the training subset from the non-test pool; the test set is
// part of the dataset identity and never changes.
CgmDataset split_dataset(const CgmDataset& ds, int train_count, std::uint64_t seed);

CgmDataset load_dataset(const std::string& dir);
void save_manifest(const CgmDataset& ds);

// CGM binary format: 8-byte magic, u32 version, u32 Nx/Ny/Nz, 3xf64 BS
// coordinate, 32-byte environment hash, then little-endian f32 gains with
// x fastest and z slowest.
void save_cgm(const Cgm& cgm, const std::string& path);
Cgm load_cgm(const std::string& path, const Sha256* expect_hash = nullptr,
             const RegionSpec* expect_spec = nullptr);

Cgm load_sample(const CgmDataset& ds, int index, const RegionSpec* expect_spec = nullptr);

EnvironmentFile load_dataset_environment(const CgmDataset& ds);

}  // namespace cgmkit
