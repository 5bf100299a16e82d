// Command-line front end for the cgmkit pipeline: environment synthesis,
// dataset construction, GAN training, CGM inference, evaluation, and
// slice export. Talks to the core exclusively through the C API.

#include <cgmkit.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

// Exit codes: 2 usage, 3 I/O, 4 validation, 5 numeric divergence.
int exit_code_for(cgmk_status status) {
  switch (status) {
    case CGMK_OK: return 0;
    case CGMK_ERR_IO:
    case CGMK_ERR_CORRUPT: return 3;
    case CGMK_ERR_VALIDATION:
    case CGMK_ERR_SHAPE_MISMATCH:
    case CGMK_ERR_HASH_MISMATCH: return 4;
    case CGMK_ERR_DIVERGENCE: return 5;
    default: return 1;
  }
}

int finish(cgmk_status status) {
  if (status != CGMK_OK) {
    std::cerr << "error: " << cgmk_status_name(status) << ": " << cgmk_last_error() << "\n";
  }
  return exit_code_for(status);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

bool parse_triplet(const std::string& s, char sep, double out[3]) {
  auto parts = split(s, sep);
  if (parts.size() != 3) return false;
  try {
    for (int i = 0; i < 3; ++i) out[i] = std::stod(parts[i]);
  } catch (...) {
    return false;
  }
  return true;
}

bool parse_int_triplet(const std::string& s, char sep, int out[3]) {
  auto parts = split(s, sep);
  if (parts.size() != 3) return false;
  try {
    for (int i = 0; i < 3; ++i) out[i] = std::stoi(parts[i]);
  } catch (...) {
    return false;
  }
  return true;
}

// The resolved configuration echoed before a run and saved next to its
// outputs, so any run can be reproduced from the echo alone.
struct ConfigEcho {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    entries.emplace_back(key, buf);
  }
  void add(const std::string& key, int value) { entries.emplace_back(key, std::to_string(value)); }
  void add(const std::string& key, uint64_t value) {
    entries.emplace_back(key, std::to_string(value));
  }

  void print(const std::string& command) const {
    std::cout << "[" << command << "]\n";
    for (const auto& [k, v] : entries) std::cout << k << " = " << v << "\n";
    std::cout.flush();
  }

  bool save(const std::string& path, const std::string& command) const {
    std::ofstream out(path);
    if (!out.good()) return false;
    out << "[" << command << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
    return out.good();
  }
};

struct GenEnvArgs {
  std::string size = "256x256x128";
  std::string cells = "32x32x32";
  double alpha = 0.5, beta = 300.0, gamma_h = 50.0;
  int count = -1;
  std::string side_cells;
  uint64_t seed = 1;
  cgmk_env_config channel{};  // channel fields only
  std::string out;
};

int run_gen_env(const GenEnvArgs& args) {
  double size[3];
  int cells[3];
  if (!parse_triplet(args.size, 'x', size)) {
    std::cerr << "error: --size expects LxWxH\n";
    return 2;
  }
  if (!parse_int_triplet(args.cells, 'x', cells) || cells[0] < 1 || cells[1] < 1 || cells[2] < 1) {
    std::cerr << "error: --cells expects NXxNYxNZ\n";
    return 2;
  }
  cgmk_env_config cfg = args.channel;
  cfg.length_m = size[0];
  cfg.width_m = size[1];
  cfg.height_m = size[2];
  cfg.cell_x_m = size[0] / cells[0];
  cfg.cell_y_m = size[1] / cells[1];
  cfg.cell_z_m = size[2] / cells[2];
  cfg.alpha = args.alpha;
  cfg.beta_per_km2 = args.beta;
  cfg.gamma_h_m = args.gamma_h;
  cfg.building_count = args.count;
  cfg.side_cells_min = 0;
  cfg.side_cells_max = 0;
  if (!args.side_cells.empty()) {
    auto parts = split(args.side_cells, ',');
    if (parts.size() != 2) {
      std::cerr << "error: --side-cells expects LO,HI\n";
      return 2;
    }
    cfg.side_cells_min = std::stoi(parts[0]);
    cfg.side_cells_max = std::stoi(parts[1]);
  }
  cfg.seed = args.seed;

  ConfigEcho echo;
  echo.add("size", args.size);
  echo.add("cells", args.cells);
  echo.add("cell_size_m",
           std::to_string(cfg.cell_x_m) + "," + std::to_string(cfg.cell_y_m) + "," +
               std::to_string(cfg.cell_z_m));
  echo.add("alpha", cfg.alpha);
  echo.add("beta_per_km2", cfg.beta_per_km2);
  echo.add("gamma_h_m", cfg.gamma_h_m);
  echo.add("building_count", cfg.building_count);
  echo.add("side_cells", args.side_cells.empty() ? "auto" : args.side_cells);
  echo.add("seed", cfg.seed);
  echo.add("k_db_los", cfg.k_db_los);
  echo.add("k_db_nlos", cfg.k_db_nlos);
  echo.add("n_pl_los", cfg.n_pl_los);
  echo.add("n_pl_nlos", cfg.n_pl_nlos);
  echo.add("sigma_sh_los", cfg.sigma_sh_los);
  echo.add("sigma_sh_nlos", cfg.sigma_sh_nlos);
  echo.add("shadow_corr_len_m", cfg.shadow_corr_len_m);
  echo.add("gamma_min_db", cfg.gamma_min_db);
  echo.add("gamma_clip_db", cfg.gamma_clip_db);
  echo.add("d_ref_m", cfg.d_ref_m);
  echo.add("out", args.out);
  echo.print("gen-env");

  cgmk_env* env = nullptr;
  cgmk_status status = cgmk_env_generate(&cfg, &env);
  if (status == CGMK_OK) status = cgmk_env_save(env, args.out.c_str());
  if (status == CGMK_OK) {
    cgmk_env_info info{};
    cgmk_env_get_info(env, &info);
    std::cout << "grid " << info.nx << "x" << info.ny << "x" << info.nz << ", "
              << info.building_count << " buildings, achieved alpha " << info.achieved_alpha
              << ", occupied cells " << info.occupied_cells << "\n";
    echo.save(args.out + ".config", "gen-env");
  }
  cgmk_env_free(env);
  return finish(status);
}

struct GenDatasetArgs {
  std::string env;
  int count = 950;
  std::string mix = "0.4,0.3,0.3";
  int test_count = 50;
  uint64_t seed = 1;
  std::string out;
};

int run_gen_dataset(const GenDatasetArgs& args) {
  double mix[3];
  if (!parse_triplet(args.mix, ',', mix)) {
    std::cerr << "error: --mix expects G,S,A fractions\n";
    return 2;
  }
  cgmk_dataset_config cfg;
  cgmk_dataset_config_defaults(&cfg);
  cfg.count = args.count;
  cfg.mix_gbs = mix[0];
  cfg.mix_sbs = mix[1];
  cfg.mix_abs = mix[2];
  cfg.test_count = args.test_count;
  cfg.seed = args.seed;

  ConfigEcho echo;
  echo.add("env", args.env);
  echo.add("count", cfg.count);
  echo.add("mix", args.mix);
  echo.add("test_count", cfg.test_count);
  echo.add("seed", cfg.seed);
  echo.add("out", args.out);
  echo.print("gen-dataset");

  cgmk_env* env = nullptr;
  cgmk_status status = cgmk_env_load(args.env.c_str(), &env);
  if (status == CGMK_OK) status = cgmk_dataset_build(env, &cfg, args.out.c_str());
  if (status == CGMK_OK) {
    std::cout << "dataset written: " << args.out << " (" << cfg.count << " maps, "
              << cfg.test_count << " test)\n";
    echo.save(args.out + "/run.config", "gen-dataset");
  }
  cgmk_env_free(env);
  return finish(status);
}

struct TrainArgs {
  std::string dataset;
  int train_count = -1;
  int epochs = 150;
  double lr = 2e-4, beta1 = 0.5, beta2 = 0.999, lambda_re = 100.0;
  int batch = 0;
  uint64_t seed = 1;
  std::string out;
};

int run_train(const TrainArgs& args) {
  cgmk_train_config cfg;
  cgmk_train_config_defaults(&cfg);
  cfg.train_count = args.train_count;
  cfg.epochs = args.epochs;
  cfg.lr = args.lr;
  cfg.beta1 = args.beta1;
  cfg.beta2 = args.beta2;
  cfg.lambda_re = args.lambda_re;
  cfg.batch = args.batch;
  cfg.seed = args.seed;

  ConfigEcho echo;
  echo.add("dataset", args.dataset);
  echo.add("train_count", cfg.train_count);
  echo.add("epochs", cfg.epochs);
  echo.add("lr", cfg.lr);
  echo.add("beta1", cfg.beta1);
  echo.add("beta2", cfg.beta2);
  echo.add("lambda_re", cfg.lambda_re);
  echo.add("batch", cfg.batch);
  echo.add("seed", cfg.seed);
  echo.add("out", args.out);
  echo.print("train");

  auto progress = [](int epoch, double d, double g, double re, void*) {
    std::printf("epoch %4d  d_loss %.6f  g_loss %.6f  recon %.6f\n", epoch, d, g, re);
    std::fflush(stdout);
  };
  cgmk_status status = cgmk_train(args.dataset.c_str(), &cfg, progress, nullptr, args.out.c_str());
  if (status == CGMK_OK) {
    std::cout << "checkpoint written: " << args.out << "\n";
    echo.save(args.out + ".config", "train");
  }
  return finish(status);
}

struct InferArgs {
  std::string method = "gan";
  std::string ckpt;
  std::string dataset;
  std::string coord;
  int k = 9;
  double p = 2.0;
  std::string out;
};

int run_infer(const InferArgs& args) {
  double coord[3];
  if (!parse_triplet(args.coord, ',', coord)) {
    std::cerr << "error: --coord expects X,Y,Z\n";
    return 2;
  }
  ConfigEcho echo;
  echo.add("method", args.method);
  echo.add("coord", args.coord);

  cgmk_status status;
  if (args.method == "gan") {
    if (args.ckpt.empty()) {
      std::cerr << "error: --ckpt is required for --method gan\n";
      return 2;
    }
    echo.add("ckpt", args.ckpt);
    echo.add("out", args.out);
    echo.print("infer");
    status = cgmk_infer_gan(args.ckpt.c_str(), coord, args.out.c_str());
  } else if (args.method == "idw") {
    if (args.dataset.empty()) {
      std::cerr << "error: --dataset is required for --method idw\n";
      return 2;
    }
    echo.add("dataset", args.dataset);
    echo.add("k", args.k);
    echo.add("p", args.p);
    echo.add("out", args.out);
    echo.print("infer");
    status = cgmk_infer_idw(args.dataset.c_str(), coord, args.k, args.p, args.out.c_str());
  } else {
    std::cerr << "error: --method must be gan or idw\n";
    return 2;
  }
  if (status == CGMK_OK) {
    std::cout << "map written: " << args.out << "\n";
    echo.save(args.out + ".config", "infer");
  }
  return finish(status);
}

struct EvalArgs {
  std::string dataset;
  std::string ckpt;
  std::string k_sweep = "1..12";
  std::string size_sweep;
  double p = 2.0;
  uint64_t seed = 1;
  std::string out;
};

int run_eval(const EvalArgs& args) {
  cgmk_eval_config cfg;
  cgmk_eval_config_defaults(&cfg);
  auto range = split(args.k_sweep, '.');
  // "a..b" splits into {a, "", b}
  if (range.size() != 3 || !range[1].empty()) {
    std::cerr << "error: --k-sweep expects LO..HI\n";
    return 2;
  }
  try {
    cfg.k_min = std::stoi(range[0]);
    cfg.k_max = std::stoi(range[2]);
  } catch (...) {
    std::cerr << "error: --k-sweep expects LO..HI\n";
    return 2;
  }
  std::vector<int> sizes;
  if (!args.size_sweep.empty()) {
    for (const auto& part : split(args.size_sweep, ',')) {
      try {
        sizes.push_back(std::stoi(part));
      } catch (...) {
        std::cerr << "error: --size-sweep expects a comma list of sizes\n";
        return 2;
      }
    }
    cfg.sweep_sizes = sizes.data();
    cfg.sweep_size_count = int(sizes.size());
  }
  cfg.idw_p = args.p;
  cfg.seed = args.seed;

  ConfigEcho echo;
  echo.add("dataset", args.dataset);
  echo.add("ckpt", args.ckpt);
  echo.add("k_sweep", args.k_sweep);
  echo.add("size_sweep", args.size_sweep.empty() ? "none" : args.size_sweep);
  echo.add("p", cfg.idw_p);
  echo.add("seed", cfg.seed);
  echo.add("out", args.out);
  echo.print("eval");

  cgmk_status status = cgmk_eval(args.dataset.c_str(), args.ckpt.c_str(), &cfg, args.out.c_str());
  if (status == CGMK_OK) {
    std::cout << "evaluation written: " << args.out << "\n";
    echo.save(args.out + "/run.config", "eval");
  }
  return finish(status);
}

struct SliceArgs {
  std::string cgm;
  std::string env;
  std::string axis = "z";
  double pos = 0.0;
  std::string out;
};

int run_slice(const SliceArgs& args) {
  if (args.axis.size() != 1 || (args.axis[0] != 'x' && args.axis[0] != 'y' && args.axis[0] != 'z')) {
    std::cerr << "error: --axis must be x, y, or z\n";
    return 2;
  }
  ConfigEcho echo;
  echo.add("cgm", args.cgm);
  echo.add("env", args.env);
  echo.add("axis", args.axis);
  echo.add("pos", args.pos);
  echo.add("out", args.out);
  echo.print("slice");

  cgmk_status status =
      cgmk_slice(args.cgm.c_str(), args.env.c_str(), args.axis[0], args.pos, args.out.c_str());
  if (status == CGMK_OK) {
    std::cout << "slice written: " << args.out << ".ppm / .csv\n";
    echo.save(args.out + ".config", "slice");
  }
  return finish(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cgmkit: urban channel gain map synthesis, GAN inference, and evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags take precedence)");

  GenEnvArgs ge;
  cgmk_env_config_defaults(&ge.channel);
  auto* gen_env = app.add_subcommand("gen-env", "Generate a synthetic urban environment");
  gen_env->add_option("--size", ge.size, "Region size LxWxH in metres")->capture_default_str();
  gen_env->add_option("--cells", ge.cells, "Grid cells NXxNYxNZ")->capture_default_str();
  gen_env->add_option("--alpha", ge.alpha, "Footprint-to-area ratio")->capture_default_str();
  gen_env->add_option("--beta", ge.beta, "Buildings per km^2")->capture_default_str();
  gen_env->add_option("--gamma-h", ge.gamma_h, "Rayleigh height scale (m)")->capture_default_str();
  gen_env->add_option("--count", ge.count, "Building count override (-1: from beta)")
      ->capture_default_str();
  gen_env->add_option("--side-cells", ge.side_cells, "Footprint side range LO,HI in cells");
  gen_env->add_option("--seed", ge.seed, "RNG seed")->capture_default_str();
  gen_env->add_option("--k-db-los", ge.channel.k_db_los, "LOS path loss intercept (dB)")
      ->capture_default_str();
  gen_env->add_option("--k-db-nlos", ge.channel.k_db_nlos, "NLOS path loss intercept (dB)")
      ->capture_default_str();
  gen_env->add_option("--n-pl-los", ge.channel.n_pl_los, "LOS path loss exponent")
      ->capture_default_str();
  gen_env->add_option("--n-pl-nlos", ge.channel.n_pl_nlos, "NLOS path loss exponent")
      ->capture_default_str();
  gen_env->add_option("--sigma-sh-los", ge.channel.sigma_sh_los, "LOS shadowing std (dB)")
      ->capture_default_str();
  gen_env->add_option("--sigma-sh-nlos", ge.channel.sigma_sh_nlos, "NLOS shadowing std (dB)")
      ->capture_default_str();
  gen_env->add_option("--shadow-corr-len", ge.channel.shadow_corr_len_m,
                      "Shadowing correlation length (m)")
      ->capture_default_str();
  gen_env->add_option("--gamma-min-db", ge.channel.gamma_min_db, "Building floor gain (dB)")
      ->capture_default_str();
  gen_env->add_option("--gamma-clip-db", ge.channel.gamma_clip_db, "Upper gain clip (dB)")
      ->capture_default_str();
  gen_env->add_option("--d-ref", ge.channel.d_ref_m, "Reference distance (m)")
      ->capture_default_str();
  gen_env->add_option("--out", ge.out, "Output environment file")->required();

  GenDatasetArgs gd;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Sample BS locations and build the CGM corpus");
  gen_dataset->add_option("--env", gd.env, "Environment file")->required();
  gen_dataset->add_option("--count", gd.count, "Number of BS locations")->capture_default_str();
  gen_dataset->add_option("--mix", gd.mix, "GBS,SBS,ABS fractions")->capture_default_str();
  gen_dataset->add_option("--test-count", gd.test_count, "Fixed test split size")
      ->capture_default_str();
  gen_dataset->add_option("--seed", gd.seed, "RNG seed")->capture_default_str();
  gen_dataset->add_option("--out", gd.out, "Output dataset directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the conditional GAN on a dataset");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset directory")->required();
  train_cmd->add_option("--train-count", tr.train_count, "Training subset size (-1: all non-test)")
      ->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--beta1", tr.beta1, "Adam beta1")->capture_default_str();
  train_cmd->add_option("--beta2", tr.beta2, "Adam beta2")->capture_default_str();
  train_cmd->add_option("--lambda-re", tr.lambda_re, "Reconstruction loss weight")
      ->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "Batch size (0: auto)")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Output checkpoint file")->required();

  InferArgs in;
  auto* infer_cmd = app.add_subcommand("infer", "Infer the CGM for a BS coordinate");
  infer_cmd->add_option("--method", in.method, "gan or idw")->capture_default_str();
  infer_cmd->add_option("--ckpt", in.ckpt, "Checkpoint (gan)");
  infer_cmd->add_option("--dataset", in.dataset, "Dataset directory (idw)");
  infer_cmd->add_option("--coord", in.coord, "BS coordinate X,Y,Z in metres")->required();
  infer_cmd->add_option("--k", in.k, "IDW neighbor count")->capture_default_str();
  infer_cmd->add_option("--p", in.p, "IDW distance exponent")->capture_default_str();
  infer_cmd->add_option("--out", in.out, "Output CGM file")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "AMSE comparison of the GAN and the IDW baseline");
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  eval_cmd->add_option("--ckpt", ev.ckpt, "Trained checkpoint")->required();
  eval_cmd->add_option("--k-sweep", ev.k_sweep, "IDW k range LO..HI")->capture_default_str();
  eval_cmd->add_option("--size-sweep", ev.size_sweep, "Training-set sizes, comma list");
  eval_cmd->add_option("--p", ev.p, "IDW distance exponent")->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "Subset selection seed")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();

  SliceArgs sl;
  auto* slice_cmd = app.add_subcommand("slice", "Export a 2D plane of a CGM as PPM + CSV");
  slice_cmd->add_option("--cgm", sl.cgm, "CGM file")->required();
  slice_cmd->add_option("--env", sl.env, "Environment file (grid geometry)")->required();
  slice_cmd->add_option("--axis", sl.axis, "Slice axis: x, y, or z")->capture_default_str();
  slice_cmd->add_option("--pos", sl.pos, "Plane position in metres")->required();
  slice_cmd->add_option("--out", sl.out, "Output file prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (gen_env->parsed()) return run_gen_env(ge);
  if (gen_dataset->parsed()) return run_gen_dataset(gd);
  if (train_cmd->parsed()) return run_train(tr);
  if (infer_cmd->parsed()) return run_infer(in);
  if (eval_cmd->parsed()) return run_eval(ev);
  if (slice_cmd->parsed()) return run_slice(sl);
  return 2;
}
