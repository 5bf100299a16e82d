#include "dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "json.hpp"
#include "rng.hpp"

namespace cgmkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(BsType t) {
  switch (t) {
    case BsType::gbs: return "gbs";
    case BsType::sbs: return "sbs";
    case BsType::abs: return "abs";
  }
  fail(ErrorKind::validation, "unknown BS type");
}

BsType bs_type_from_string(const std::string& s) {
  if (s == "gbs") return BsType::gbs;
  if (s == "sbs") return BsType::sbs;
  if (s == "abs") return BsType::abs;
  fail(ErrorKind::validation, "unknown BS type: " + s);
}

namespace {

double median_height(const std::vector<Building>& buildings) {
  if (buildings.empty()) return 0.0;
  std::vector<double> h;
  h.reserve(buildings.size());
  for (const auto& b : buildings) h.push_back(b.height);
  std::sort(h.begin(), h.end());
  const std::size_t n = h.size();
  return n % 2 ? h[n / 2] : 0.5 * (h[n / 2 - 1] + h[n / 2]);
}

bool adjacent_to_building(const UrbanEnvironment& env, const CellIndex& c) {
  const int di[6] = {1, -1, 0, 0, 0, 0};
  const int dj[6] = {0, 0, 1, -1, 0, 0};
  const int dk[6] = {0, 0, 0, 0, 1, -1};
  for (int t = 0; t < 6; ++t) {
    CellIndex n{c.i + di[t], c.j + dj[t], c.k + dk[t]};
    if (env.spec.in_bounds(n) && env.mask.occupied(n)) return true;
  }
  return false;
}

// Largest-remainder apportionment of count over the three types.
std::array<int, 3> apportion(int count, const BsMix& mix) {
  const double fr[3] = {mix.gbs, mix.sbs, mix.abs};
  std::array<int, 3> out{};
  double rem[3];
  int assigned = 0;
  for (int t = 0; t < 3; ++t) {
    const double exact = count * fr[t];
    out[t] = int(exact);
    rem[t] = exact - out[t];
    assigned += out[t];
  }
  while (assigned < count) {
    int best = 0;
    for (int t = 1; t < 3; ++t)
      if (rem[t] > rem[best]) best = t;
    ++out[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return out;
}

std::string sample_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cgm_%05d.bin", index);
  return buf;
}

// Seeded sample of `take` distinct values from `pool` (partial
// Fisher-Yates); output sorted for stable manifests.
std::vector<int> draw_indices(std::vector<int> pool, int take, std::mt19937_64& rng) {
  require(take <= int(pool.size()), ErrorKind::validation, "sample size exceeds pool");
  for (int i = 0; i < take; ++i) {
    std::uniform_int_distribution<int> pick(i, int(pool.size()) - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  return pool;
}

constexpr char kCgmMagic[8] = {'C', 'G', 'M', 'K', 'G', 'A', 'I', 'N'};
constexpr std::uint32_t kCgmVersion = 1;

}  // namespace

std::vector<std::pair<Point3, BsType>> sample_bs_locations(const UrbanEnvironment& env, int count,
                                                           const BsMix& mix, std::uint64_t seed) {
  require(count >= 0, ErrorKind::validation, "count must be nonnegative");
  require(mix.gbs >= 0 && mix.sbs >= 0 && mix.abs >= 0, ErrorKind::validation,
          "mix fractions must be nonnegative");
  require(std::abs(mix.gbs + mix.sbs + mix.abs - 1.0) < 1e-9, ErrorKind::validation,
          "mix fractions must sum to 1");

  const RegionSpec& spec = env.spec;
  const double z_abs = median_height(env.buildings);

  std::vector<std::int64_t> pools[3];
  for (int k = 1; k <= spec.nz(); ++k)
    for (int j = 1; j <= spec.ny(); ++j)
      for (int i = 1; i <= spec.nx(); ++i) {
        const CellIndex c{i, j, k};
        if (env.mask.occupied(c)) continue;
        const std::int64_t lin = spec.linear(c);
        if (k == 1) pools[0].push_back(lin);
        if (adjacent_to_building(env, c)) pools[1].push_back(lin);
        if (spec.cell_center(c).z > z_abs) pools[2].push_back(lin);
      }

  const auto wanted = apportion(count, mix);
  auto rng = make_rng(seed, Stream::bs_sampling);
  std::vector<std::uint8_t> taken(std::size_t(spec.cell_count()), 0);
  std::vector<std::pair<Point3, BsType>> out;
  out.reserve(count);
  const BsType types[3] = {BsType::gbs, BsType::sbs, BsType::abs};
  const char* names[3] = {"GBS", "SBS", "ABS"};

  for (int t = 0; t < 3; ++t) {
    if (wanted[t] == 0) continue;
    // Cells already claimed by an earlier type stay off the table so two
    // BSs never share a coordinate.
    std::vector<std::int64_t> pool;
    pool.reserve(pools[t].size());
    for (auto lin : pools[t])
      if (!taken[std::size_t(lin)]) pool.push_back(lin);
    require(int(pool.size()) >= wanted[t], ErrorKind::validation,
            std::string("not enough admissible cells for ") + names[t] + " placements");
    for (int i = 0; i < wanted[t]; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      const std::int64_t lin = pool[i];
      taken[std::size_t(lin)] = 1;
      const int ii = int(lin % spec.nx());
      const int jj = int((lin / spec.nx()) % spec.ny());
      const int kk = int(lin / (std::int64_t(spec.nx()) * spec.ny()));
      out.emplace_back(spec.cell_center({ii + 1, jj + 1, kk + 1}), types[t]);
    }
  }
  return out;
}

CgmDataset build_dataset(const EnvironmentFile& env_file,
                         const std::vector<std::pair<Point3, BsType>>& locations,
                         const std::string& out_dir, int test_count, std::uint64_t seed) {
  require(test_count >= 0 && test_count <= int(locations.size()), ErrorKind::validation,
          "test_count must lie in [0, sample count]");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorKind::io, "cannot create dataset directory: " + out_dir);

  CgmDataset ds;
  ds.dir = out_dir;
  ds.seed = seed;
  save_environment(env_file, (fs::path(out_dir) / ds.env_file).string());
  ds.env_hash = environment_hash(env_file);

  for (std::size_t m = 0; m < locations.size(); ++m) {
    const auto& [bs, type] = locations[m];
    Cgm cgm = generate_cgm(env_file.env, env_file.channel, bs, ds.env_hash);
    const std::string name = sample_filename(int(m));
    save_cgm(cgm, (fs::path(out_dir) / name).string());
    ds.samples.push_back({bs, type, name});
  }

  std::vector<int> all(locations.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
  auto rng = make_rng(seed, Stream::test_split);
  ds.test_indices = draw_indices(all, test_count, rng);
  for (int i : all)
    if (!std::binary_search(ds.test_indices.begin(), ds.test_indices.end(), i))
      ds.train_indices.push_back(i);

  save_manifest(ds);
  return ds;
}

CgmDataset split_dataset(const CgmDataset& ds, int train_count, std::uint64_t seed) {
  std::vector<int> pool;
  for (int i = 0; i < int(ds.samples.size()); ++i)
    if (!std::binary_search(ds.test_indices.begin(), ds.test_indices.end(), i)) pool.push_back(i);
  require(train_count >= 0 && train_count <= int(pool.size()), ErrorKind::validation,
          "train_count exceeds the non-test pool");
  CgmDataset out = ds;
  auto rng = make_rng(seed, Stream::train_subset);
  out.train_indices = draw_indices(std::move(pool), train_count, rng);
  return out;
}

void save_manifest(const CgmDataset& ds) {
  json j;
  j["env_file"] = ds.env_file;
  j["env_hash"] = to_hex(ds.env_hash);
  j["seed"] = ds.seed;
  json samples = json::array();
  for (const auto& s : ds.samples) {
    samples.push_back(
        {{"path", s.path}, {"bs", {s.bs.x, s.bs.y, s.bs.z}}, {"type", to_string(s.type)}});
  }
  j["samples"] = samples;
  j["test_indices"] = ds.test_indices;
  j["train_indices"] = ds.train_indices;
  write_file((fs::path(ds.dir) / "manifest.json").string(), j.dump(2) + "\n");
}

CgmDataset load_dataset(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("manifest is not valid JSON: ") + e.what());
  }
  CgmDataset ds;
  ds.dir = dir;
  try {
    ds.env_file = j.at("env_file");
    const std::string hex = j.at("env_hash");
    require(hex.size() == 64, ErrorKind::corrupt_file, "manifest env_hash malformed");
    for (int i = 0; i < 32; ++i)
      ds.env_hash[i] = std::uint8_t(std::stoi(hex.substr(2 * std::size_t(i), 2), nullptr, 16));
    ds.seed = j.at("seed");
    for (const auto& s : j.at("samples")) {
      const auto& bs = s.at("bs");
      ds.samples.push_back(
          {{bs.at(0), bs.at(1), bs.at(2)}, bs_type_from_string(s.at("type")), s.at("path")});
    }
    ds.test_indices = j.at("test_indices").get<std::vector<int>>();
    ds.train_indices = j.at("train_indices").get<std::vector<int>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("manifest missing fields: ") + e.what());
  }
  for (int i : ds.test_indices)
    require(i >= 0 && i < int(ds.samples.size()), ErrorKind::corrupt_file,
            "manifest test index out of range");
  for (int i : ds.train_indices)
    require(i >= 0 && i < int(ds.samples.size()), ErrorKind::corrupt_file,
            "manifest train index out of range");
  for (const auto& s : ds.samples)
    require(fs::exists(fs::path(dir) / s.path), ErrorKind::io,
            "dataset file missing: " + s.path);
  return ds;
}

void save_cgm(const Cgm& cgm, const std::string& path) {
  require(cgm.cell_count() == std::int64_t(cgm.gains_db.size()), ErrorKind::shape_mismatch,
          "CGM tensor size does not match its dimensions");
  std::string out(kCgmMagic, sizeof(kCgmMagic));
  auto put = [&out](const void* p, std::size_t n) {
    out.append(reinterpret_cast<const char*>(p), n);
  };
  const std::uint32_t version = kCgmVersion;
  const std::uint32_t dims[3] = {std::uint32_t(cgm.nx), std::uint32_t(cgm.ny),
                                 std::uint32_t(cgm.nz)};
  const double bs[3] = {cgm.bs.x, cgm.bs.y, cgm.bs.z};
  put(&version, 4);
  put(dims, 12);
  put(bs, 24);
  put(cgm.env_hash.data(), cgm.env_hash.size());
  put(cgm.gains_db.data(), cgm.gains_db.size() * sizeof(float));
  write_file(path, out);
}

Cgm load_cgm(const std::string& path, const Sha256* expect_hash, const RegionSpec* expect_spec) {
  const std::string bytes = read_file(path);
  constexpr std::size_t header = 8 + 4 + 12 + 24 + 32;
  require(bytes.size() >= header, ErrorKind::corrupt_file, "CGM file truncated: " + path);
  require(std::memcmp(bytes.data(), kCgmMagic, sizeof(kCgmMagic)) == 0, ErrorKind::corrupt_file,
          "not a CGM file: " + path);
  std::size_t pos = 8;
  auto take = [&](void* p, std::size_t n) {
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  };
  std::uint32_t version;
  take(&version, 4);
  require(version == kCgmVersion, ErrorKind::corrupt_file, "unsupported CGM version");
  std::uint32_t dims[3];
  take(dims, 12);
  Cgm cgm;
  cgm.nx = int(dims[0]);
  cgm.ny = int(dims[1]);
  cgm.nz = int(dims[2]);
  require(cgm.nx > 0 && cgm.ny > 0 && cgm.nz > 0, ErrorKind::corrupt_file,
          "CGM dimensions out of range");
  double bs[3];
  take(bs, 24);
  cgm.bs = {bs[0], bs[1], bs[2]};
  take(cgm.env_hash.data(), cgm.env_hash.size());
  const std::size_t payload = std::size_t(cgm.cell_count()) * sizeof(float);
  require(bytes.size() == header + payload, ErrorKind::corrupt_file,
          "CGM payload size mismatch: " + path);
  cgm.gains_db.resize(std::size_t(cgm.cell_count()));
  take(cgm.gains_db.data(), payload);

  if (expect_spec) {
    require(cgm.nx == expect_spec->nx() && cgm.ny == expect_spec->ny() &&
                cgm.nz == expect_spec->nz(),
            ErrorKind::shape_mismatch, "CGM grid shape does not match the environment");
  }
  if (expect_hash) {
    require(cgm.env_hash == *expect_hash, ErrorKind::hash_mismatch,
            "CGM belongs to a different environment");
  }
  return cgm;
}

Cgm load_sample(const CgmDataset& ds, int index, const RegionSpec* expect_spec) {
  require(index >= 0 && index < int(ds.samples.size()), ErrorKind::validation,
          "sample index out of range");
  return load_cgm((fs::path(ds.dir) / ds.samples[index].path).string(), &ds.env_hash, expect_spec);
}

EnvironmentFile load_dataset_environment(const CgmDataset& ds) {
  const std::string path = (fs::path(ds.dir) / ds.env_file).string();
  EnvironmentFile env = load_environment(path);
  require(sha256(read_file(path)) == ds.env_hash, ErrorKind::hash_mismatch,
          "environment file does not match the manifest hash");
  return env;
}

}  // namespace cgmkit
