#include "cgmkit.h"

#include <cstring>
#include <exception>
#include <string>

#include "cgan.hpp"
#include "dataset.hpp"
#include "env_io.hpp"
#include "eval.hpp"
#include "idw.hpp"

using namespace cgmkit;

struct cgmk_env {
  EnvironmentFile file;
};

struct cgmk_cgm {
  Cgm cgm;
};

namespace {

thread_local std::string g_last_error;

cgmk_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return CGMK_ERR_VALIDATION;
    case ErrorKind::io: return CGMK_ERR_IO;
    case ErrorKind::corrupt_file: return CGMK_ERR_CORRUPT;
    case ErrorKind::shape_mismatch: return CGMK_ERR_SHAPE_MISMATCH;
    case ErrorKind::hash_mismatch: return CGMK_ERR_HASH_MISMATCH;
    case ErrorKind::divergence: return CGMK_ERR_DIVERGENCE;
  }
  return CGMK_ERR_INTERNAL;
}

template <typename Fn>
cgmk_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CGMK_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGMK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CGMK_ERR_INTERNAL;
  }
}

cgmk_status invalid_argument(const char* msg) {
  g_last_error = msg;
  return CGMK_ERR_VALIDATION;
}

GanModel load_model(const char* ckpt_path) {
  return model_from_checkpoint(nn::load_checkpoint(ckpt_path));
}

}  // namespace

extern "C" {

const char* cgmk_status_name(cgmk_status status) {
  switch (status) {
    case CGMK_OK: return "ok";
    case CGMK_ERR_VALIDATION: return "validation error";
    case CGMK_ERR_IO: return "io error";
    case CGMK_ERR_CORRUPT: return "corrupt file";
    case CGMK_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case CGMK_ERR_HASH_MISMATCH: return "environment hash mismatch";
    case CGMK_ERR_DIVERGENCE: return "numeric divergence";
    case CGMK_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* cgmk_last_error(void) { return g_last_error.c_str(); }

void cgmk_env_config_defaults(cgmk_env_config* cfg) {
  if (!cfg) return;
  *cfg = cgmk_env_config{};
  cfg->length_m = 256.0;
  cfg->width_m = 256.0;
  cfg->height_m = 128.0;
  cfg->cell_x_m = 8.0;
  cfg->cell_y_m = 8.0;
  cfg->cell_z_m = 4.0;
  cfg->alpha = 0.5;
  cfg->beta_per_km2 = 300.0;
  cfg->gamma_h_m = 50.0;
  cfg->building_count = -1;
  cfg->side_cells_min = 0;
  cfg->side_cells_max = 0;
  cfg->seed = 1;
  ChannelParams ch;
  cfg->k_db_los = ch.k_db_los;
  cfg->k_db_nlos = ch.k_db_nlos;
  cfg->n_pl_los = ch.n_pl_los;
  cfg->n_pl_nlos = ch.n_pl_nlos;
  cfg->sigma_sh_los = ch.sigma_sh_los;
  cfg->sigma_sh_nlos = ch.sigma_sh_nlos;
  cfg->shadow_corr_len_m = ch.shadow_corr_len;
  cfg->gamma_min_db = ch.gamma_min_db;
  cfg->gamma_clip_db = ch.gamma_clip_db;
  cfg->d_ref_m = ch.d_ref;
}

cgmk_status cgmk_env_generate(const cgmk_env_config* cfg, cgmk_env** out) {
  if (!cfg || !out) return invalid_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    RegionSpec spec(cfg->length_m, cfg->width_m, cfg->height_m, cfg->cell_x_m, cfg->cell_y_m,
                    cfg->cell_z_m);
    UrbanParams params;
    params.alpha = cfg->alpha;
    params.beta = cfg->beta_per_km2;
    params.gamma_h = cfg->gamma_h_m;
    params.seed = cfg->seed;
    if (cfg->building_count >= 0) params.building_count = cfg->building_count;
    if (cfg->side_cells_min > 0 && cfg->side_cells_max > 0) {
      params.side_cells_min = cfg->side_cells_min;
      params.side_cells_max = cfg->side_cells_max;
    }
    ChannelParams ch;
    ch.k_db_los = cfg->k_db_los;
    ch.k_db_nlos = cfg->k_db_nlos;
    ch.n_pl_los = cfg->n_pl_los;
    ch.n_pl_nlos = cfg->n_pl_nlos;
    ch.sigma_sh_los = cfg->sigma_sh_los;
    ch.sigma_sh_nlos = cfg->sigma_sh_nlos;
    ch.shadow_corr_len = cfg->shadow_corr_len_m;
    ch.gamma_min_db = cfg->gamma_min_db;
    ch.gamma_clip_db = cfg->gamma_clip_db;
    ch.d_ref = cfg->d_ref_m;
    ch.validate();
    *out = new cgmk_env{{generate_environment(spec, params), ch}};
  });
}

cgmk_status cgmk_env_load(const char* path, cgmk_env** out) {
  if (!path || !out) return invalid_argument("null argument");
  *out = nullptr;
  return guarded([&] { *out = new cgmk_env{load_environment(path)}; });
}

cgmk_status cgmk_env_save(const cgmk_env* env, const char* path) {
  if (!env || !path) return invalid_argument("null argument");
  return guarded([&] { save_environment(env->file, path); });
}

cgmk_status cgmk_env_get_info(const cgmk_env* env, cgmk_env_info* info) {
  if (!env || !info) return invalid_argument("null argument");
  return guarded([&] {
    info->nx = env->file.env.spec.nx();
    info->ny = env->file.env.spec.ny();
    info->nz = env->file.env.spec.nz();
    info->building_count = int(env->file.env.buildings.size());
    info->achieved_alpha = env->file.env.achieved_alpha();
    info->occupied_cells = env->file.env.mask.occupied_count();
  });
}

void cgmk_env_free(cgmk_env* env) { delete env; }

void cgmk_dataset_config_defaults(cgmk_dataset_config* cfg) {
  if (!cfg) return;
  *cfg = cgmk_dataset_config{};
  cfg->count = 950;
  BsMix mix;
  cfg->mix_gbs = mix.gbs;
  cfg->mix_sbs = mix.sbs;
  cfg->mix_abs = mix.abs;
  cfg->test_count = 50;
  cfg->seed = 1;
}

cgmk_status cgmk_dataset_build(const cgmk_env* env, const cgmk_dataset_config* cfg,
                               const char* out_dir) {
  if (!env || !cfg || !out_dir) return invalid_argument("null argument");
  return guarded([&] {
    BsMix mix{cfg->mix_gbs, cfg->mix_sbs, cfg->mix_abs};
    auto locations = sample_bs_locations(env->file.env, cfg->count, mix, cfg->seed);
    build_dataset(env->file, locations, out_dir, cfg->test_count, cfg->seed);
  });
}

void cgmk_train_config_defaults(cgmk_train_config* cfg) {
  if (!cfg) return;
  *cfg = cgmk_train_config{};
  GanHyper hyper;
  cfg->train_count = -1;
  cfg->epochs = hyper.epochs;
  cfg->lr = hyper.lr;
  cfg->beta1 = hyper.beta1;
  cfg->beta2 = hyper.beta2;
  cfg->lambda_re = hyper.lambda_re;
  cfg->batch = 0;
  cfg->seed = hyper.seed;
}

cgmk_status cgmk_train(const char* dataset_dir, const cgmk_train_config* cfg,
                       cgmk_train_callback callback, void* user, const char* out_ckpt) {
  if (!dataset_dir || !cfg || !out_ckpt) return invalid_argument("null argument");
  return guarded([&] {
    CgmDataset ds = load_dataset(dataset_dir);
    if (cfg->train_count >= 0) ds = split_dataset(ds, cfg->train_count, cfg->seed);
    const EnvironmentFile envf = load_dataset_environment(ds);
    const RegionSpec& spec = envf.env.spec;
    require(spec.nx() == spec.ny() && spec.ny() == spec.nz(), ErrorKind::validation,
            "GAN training needs a cubic grid");
    Normalizer norm;
    norm.gain_min_db = envf.channel.gamma_min_db;
    norm.gain_max_db = envf.channel.gamma_clip_db;
    norm.extent_x = spec.length();
    norm.extent_y = spec.width();
    norm.extent_z = spec.height();
    GanHyper hyper;
    hyper.lr = cfg->lr;
    hyper.beta1 = cfg->beta1;
    hyper.beta2 = cfg->beta2;
    hyper.lambda_re = cfg->lambda_re;
    hyper.batch = cfg->batch > 0 ? cfg->batch : 0;
    hyper.epochs = cfg->epochs;
    hyper.seed = cfg->seed;
    GanModel model = build_gan_model(spec.nx(), norm, hyper, ds.env_hash);
    TrainProgress progress;
    if (callback) {
      progress = [callback, user](int epoch, const EpochLoss& e) {
        callback(epoch, e.d_loss, e.g_loss, e.recon, user);
      };
    }
    train(model, ds, progress);
    nn::save_checkpoint(model_to_checkpoint(model), out_ckpt);
  });
}

cgmk_status cgmk_infer_gan(const char* ckpt_path, const double coord[3], const char* out_cgm) {
  if (!ckpt_path || !coord || !out_cgm) return invalid_argument("null argument");
  return guarded([&] {
    const GanModel model = load_model(ckpt_path);
    const Cgm cgm = infer(model, {coord[0], coord[1], coord[2]});
    save_cgm(cgm, out_cgm);
  });
}

cgmk_status cgmk_infer_idw(const char* dataset_dir, const double coord[3], int k, double p,
                           const char* out_cgm) {
  if (!dataset_dir || !coord || !out_cgm) return invalid_argument("null argument");
  return guarded([&] {
    const CgmDataset ds = load_dataset(dataset_dir);
    const Cgm cgm = idw_infer(ds, {coord[0], coord[1], coord[2]}, k, p);
    save_cgm(cgm, out_cgm);
  });
}

void cgmk_eval_config_defaults(cgmk_eval_config* cfg) {
  if (!cfg) return;
  *cfg = cgmk_eval_config{};
  cfg->k_min = 1;
  cfg->k_max = 12;
  cfg->idw_p = 2.0;
  cfg->sweep_sizes = nullptr;
  cfg->sweep_size_count = 0;
  cfg->seed = 1;
}

cgmk_status cgmk_eval(const char* dataset_dir, const char* ckpt_path, const cgmk_eval_config* cfg,
                      const char* out_dir) {
  if (!dataset_dir || !ckpt_path || !cfg || !out_dir) return invalid_argument("null argument");
  return guarded([&] {
    require(cfg->k_min >= 1 && cfg->k_max >= cfg->k_min, ErrorKind::validation,
            "bad k sweep range");
    const CgmDataset ds = load_dataset(dataset_dir);
    const GanModel model = load_model(ckpt_path);
    EvalConfig ec;
    for (int k = cfg->k_min; k <= cfg->k_max; ++k) ec.k_values.push_back(k);
    ec.idw_p = cfg->idw_p;
    for (int i = 0; i < cfg->sweep_size_count; ++i) ec.sweep_sizes.push_back(cfg->sweep_sizes[i]);
    ec.seed = cfg->seed;
    eval_run(ds, model, ckpt_path, ec, out_dir);
  });
}

cgmk_status cgmk_slice(const char* cgm_path, const char* env_path, char axis, double position,
                       const char* out_prefix) {
  if (!cgm_path || !env_path || !out_prefix) return invalid_argument("null argument");
  return guarded([&] {
    const EnvironmentFile envf = load_environment(env_path);
    const Sha256 expect = environment_hash(envf);
    const Cgm cgm = load_cgm(cgm_path, &expect, &envf.env.spec);
    export_slices(cgm, envf.env.spec, axis, position, envf.channel.gamma_min_db,
                  envf.channel.gamma_clip_db, out_prefix);
  });
}

cgmk_status cgmk_cgm_load(const char* path, cgmk_cgm** out) {
  if (!path || !out) return invalid_argument("null argument");
  *out = nullptr;
  return guarded([&] { *out = new cgmk_cgm{load_cgm(path)}; });
}

void cgmk_cgm_dims(const cgmk_cgm* cgm, int* nx, int* ny, int* nz) {
  if (!cgm) return;
  if (nx) *nx = cgm->cgm.nx;
  if (ny) *ny = cgm->cgm.ny;
  if (nz) *nz = cgm->cgm.nz;
}

void cgmk_cgm_bs(const cgmk_cgm* cgm, double coord[3]) {
  if (!cgm || !coord) return;
  coord[0] = cgm->cgm.bs.x;
  coord[1] = cgm->cgm.bs.y;
  coord[2] = cgm->cgm.bs.z;
}

const float* cgmk_cgm_gains(const cgmk_cgm* cgm) { return cgm ? cgm->cgm.gains_db.data() : nullptr; }

void cgmk_cgm_free(cgmk_cgm* cgm) { delete cgm; }

}  // extern "C"
