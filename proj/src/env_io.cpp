#include "env_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cgmkit {

using nlohmann::json;

std::string serialize_environment(const EnvironmentFile& file) {
  const UrbanEnvironment& env = file.env;
  json j;
  j["region"] = {{"length", env.spec.length()},
                 {"width", env.spec.width()},
                 {"height", env.spec.height()},
                 {"cell_size", {env.spec.dx(), env.spec.dy(), env.spec.dz()}}};
  json urban = {{"alpha", env.params.alpha},
                {"beta", env.params.beta},
                {"gamma_h", env.params.gamma_h},
                {"seed", env.params.seed}};
  if (env.params.building_count) urban["building_count"] = *env.params.building_count;
  if (env.params.side_cells_min)
    urban["side_cells"] = {*env.params.side_cells_min, *env.params.side_cells_max};
  j["urban"] = urban;
  j["shadow_seed"] = env.shadow_seed;
  j["achieved_alpha"] = env.achieved_alpha();
  j["channel"] = {{"k_db_los", file.channel.k_db_los},
                  {"k_db_nlos", file.channel.k_db_nlos},
                  {"n_pl_los", file.channel.n_pl_los},
                  {"n_pl_nlos", file.channel.n_pl_nlos},
                  {"sigma_sh_los", file.channel.sigma_sh_los},
                  {"sigma_sh_nlos", file.channel.sigma_sh_nlos},
                  {"shadow_corr_len", file.channel.shadow_corr_len},
                  {"gamma_min_db", file.channel.gamma_min_db},
                  {"gamma_clip_db", file.channel.gamma_clip_db},
                  {"d_ref", file.channel.d_ref}};
  json buildings = json::array();
  for (const auto& b : env.buildings) {
    buildings.push_back({{"rect", {b.x_min, b.y_min, b.x_max, b.y_max}}, {"height", b.height}});
  }
  j["buildings"] = buildings;
  return j.dump(2) + "\n";
}

EnvironmentFile deserialize_environment(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("environment file is not valid JSON: ") + e.what());
  }
  try {
    const json& r = j.at("region");
    const auto& cs = r.at("cell_size");
    RegionSpec spec(r.at("length"), r.at("width"), r.at("height"), cs.at(0), cs.at(1), cs.at(2));

    UrbanParams params;
    const json& u = j.at("urban");
    params.alpha = u.at("alpha");
    params.beta = u.at("beta");
    params.gamma_h = u.at("gamma_h");
    params.seed = u.at("seed");
    if (u.contains("building_count")) params.building_count = u.at("building_count").get<int>();
    if (u.contains("side_cells")) {
      params.side_cells_min = u.at("side_cells").at(0).get<int>();
      params.side_cells_max = u.at("side_cells").at(1).get<int>();
    }

    EnvironmentFile out{{spec, params, {}, {}, j.at("shadow_seed")}, {}};
    for (const auto& b : j.at("buildings")) {
      const auto& rect = b.at("rect");
      Building bd{rect.at(0), rect.at(1), rect.at(2), rect.at(3), b.at("height")};
      require(bd.x_min < bd.x_max && bd.y_min < bd.y_max, ErrorKind::validation,
              "building footprint is degenerate");
      require(bd.height > 0.0 && bd.height <= spec.height(), ErrorKind::validation,
              "building height outside (0, H]");
      out.env.buildings.push_back(bd);
    }
    out.env.mask = rasterize(spec, out.env.buildings);

    const json& c = j.at("channel");
    ChannelParams& ch = out.channel;
    ch.k_db_los = c.at("k_db_los");
    ch.k_db_nlos = c.at("k_db_nlos");
    ch.n_pl_los = c.at("n_pl_los");
    ch.n_pl_nlos = c.at("n_pl_nlos");
    ch.sigma_sh_los = c.at("sigma_sh_los");
    ch.sigma_sh_nlos = c.at("sigma_sh_nlos");
    ch.shadow_corr_len = c.at("shadow_corr_len");
    ch.gamma_min_db = c.at("gamma_min_db");
    ch.gamma_clip_db = c.at("gamma_clip_db");
    ch.d_ref = c.at("d_ref");
    ch.validate();
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("environment file missing fields: ") + e.what());
  }
}

void save_environment(const EnvironmentFile& file, const std::string& path) {
  write_file(path, serialize_environment(file));
}

EnvironmentFile load_environment(const std::string& path) {
  return deserialize_environment(read_file(path));
}

Sha256 environment_hash(const EnvironmentFile& file) {
  return sha256(serialize_environment(file));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::io, "cannot open file for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), ErrorKind::io, "read failed: " + path);
  return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::io, "cannot open file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  require(out.good(), ErrorKind::io, "write failed: " + path);
}

}  // namespace cgmkit
