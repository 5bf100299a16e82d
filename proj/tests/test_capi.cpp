// Exercises every public entry point of the shared library the way a
// foreign-language client would: configs in, status codes out, artifacts
// on disk. Uses only cgmkit.h.

#include <cgmkit.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#define ASSERT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      std::fprintf(stderr, "FAILED %s:%d: %s (last error: %s)\n", __FILE__, \
                   __LINE__, #cond, cgmk_last_error());                   \
      return 1;                                                           \
    }                                                                     \
  } while (0)

namespace {

struct EpochTally {
  int calls = 0;
  double last_recon = 0.0;
};

void on_epoch(int, double, double, double recon, void* user) {
  auto* tally = static_cast<EpochTally*>(user);
  tally->calls++;
  tally->last_recon = recon;
}

}  // namespace

int main() {
  const std::string root = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/cgmkit_capi_" + std::to_string(std::rand());
  const std::string env_path = root + "_env.json";
  const std::string ds_dir = root + "_ds";
  const std::string ckpt = root + "_model.ckpt";
  const std::string gan_map = root + "_gan.bin";
  const std::string idw_map = root + "_idw.bin";
  const std::string eval_dir = root + "_eval";
  const std::string slice_prefix = root + "_slice";

  // status plumbing
  ASSERT(std::strcmp(cgmk_status_name(CGMK_OK), "ok") == 0);
  ASSERT(cgmk_env_load("/nonexistent/nope.json", nullptr) == CGMK_ERR_VALIDATION);

  // environment: generate -> save -> load -> info
  cgmk_env_config env_cfg;
  cgmk_env_config_defaults(&env_cfg);
  env_cfg.length_m = 128.0;
  env_cfg.width_m = 128.0;
  env_cfg.height_m = 64.0;
  env_cfg.cell_x_m = 8.0;
  env_cfg.cell_y_m = 8.0;
  env_cfg.cell_z_m = 4.0;
  env_cfg.gamma_h_m = 20.0;
  env_cfg.seed = 404;

  cgmk_env* env = nullptr;
  ASSERT(cgmk_env_generate(&env_cfg, &env) == CGMK_OK);
  ASSERT(cgmk_env_save(env, env_path.c_str()) == CGMK_OK);

  cgmk_env* loaded = nullptr;
  ASSERT(cgmk_env_load(env_path.c_str(), &loaded) == CGMK_OK);
  cgmk_env_info info{};
  ASSERT(cgmk_env_get_info(loaded, &info) == CGMK_OK);
  ASSERT(info.nx == 16 && info.ny == 16 && info.nz == 16);
  ASSERT(info.building_count > 0);
  ASSERT(std::fabs(info.achieved_alpha - 0.5) <= 0.05);
  ASSERT(cgmk_env_load("/nonexistent/nope.json", &loaded) == CGMK_ERR_IO);

  // dataset
  cgmk_dataset_config ds_cfg;
  cgmk_dataset_config_defaults(&ds_cfg);
  ds_cfg.count = 16;
  ds_cfg.test_count = 4;
  ds_cfg.seed = 7;
  ASSERT(cgmk_dataset_build(env, &ds_cfg, ds_dir.c_str()) == CGMK_OK);

  // bad mix fractions are refused
  cgmk_dataset_config bad = ds_cfg;
  bad.mix_gbs = 0.9;
  ASSERT(cgmk_dataset_build(env, &bad, ds_dir.c_str()) == CGMK_ERR_VALIDATION);

  // train a short run with a progress callback
  cgmk_train_config train_cfg;
  cgmk_train_config_defaults(&train_cfg);
  train_cfg.epochs = 2;
  train_cfg.batch = 4;
  train_cfg.seed = 5;
  EpochTally tally;
  ASSERT(cgmk_train(ds_dir.c_str(), &train_cfg, on_epoch, &tally, ckpt.c_str()) == CGMK_OK);
  ASSERT(tally.calls == 2);
  ASSERT(std::isfinite(tally.last_recon));

  // inference, both methods
  const double coord[3] = {52.0, 12.0, 30.0};
  ASSERT(cgmk_infer_gan(ckpt.c_str(), coord, gan_map.c_str()) == CGMK_OK);
  ASSERT(cgmk_infer_idw(ds_dir.c_str(), coord, 3, 2.0, idw_map.c_str()) == CGMK_OK);
  ASSERT(cgmk_infer_idw(ds_dir.c_str(), coord, 99, 2.0, idw_map.c_str()) == CGMK_ERR_VALIDATION);

  // CGM inspection
  cgmk_cgm* cgm = nullptr;
  ASSERT(cgmk_cgm_load(gan_map.c_str(), &cgm) == CGMK_OK);
  int nx = 0, ny = 0, nz = 0;
  cgmk_cgm_dims(cgm, &nx, &ny, &nz);
  ASSERT(nx == 16 && ny == 16 && nz == 16);
  double bs[3] = {0, 0, 0};
  cgmk_cgm_bs(cgm, bs);
  ASSERT(bs[0] == coord[0] && bs[1] == coord[1] && bs[2] == coord[2]);
  const float* gains = cgmk_cgm_gains(cgm);
  ASSERT(gains != nullptr);
  for (int i = 0; i < nx * ny * nz; ++i) ASSERT(gains[i] >= -250.0f && gains[i] <= -70.0f);
  cgmk_cgm_free(cgm);

  // corrupting the checkpoint surfaces a distinct status
  {
    FILE* f = std::fopen(ckpt.c_str(), "r+b");
    ASSERT(f != nullptr);
    std::fputc('X', f);
    std::fclose(f);
    ASSERT(cgmk_infer_gan(ckpt.c_str(), coord, gan_map.c_str()) == CGMK_ERR_CORRUPT);
  }
  // retrain to restore the checkpoint for eval
  ASSERT(cgmk_train(ds_dir.c_str(), &train_cfg, nullptr, nullptr, ckpt.c_str()) == CGMK_OK);

  // evaluation without a size sweep
  cgmk_eval_config eval_cfg;
  cgmk_eval_config_defaults(&eval_cfg);
  eval_cfg.k_min = 1;
  eval_cfg.k_max = 3;
  ASSERT(cgmk_eval(ds_dir.c_str(), ckpt.c_str(), &eval_cfg, eval_dir.c_str()) == CGMK_OK);

  // slice export against the environment geometry
  ASSERT(cgmk_slice(gan_map.c_str(), env_path.c_str(), 'z', 30.0, slice_prefix.c_str()) == CGMK_OK);
  ASSERT(cgmk_slice(gan_map.c_str(), env_path.c_str(), 'q', 30.0, slice_prefix.c_str()) ==
         CGMK_ERR_VALIDATION);

  cgmk_env_free(env);
  cgmk_env_free(loaded);
  std::printf("capi_tests: all checks passed\n");
  return 0;
}
