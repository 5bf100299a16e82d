/*
 * cgmkit - synthetic urban radio environments, channel gain map (CGM)
 * datasets, 3D conditional GAN training, and IDW baselines behind a C API.
 *
 * All functions return cgmk_status; cgmk_last_error() holds a thread-local
 * message for the most recent failure. Handles are opaque and freed with
 * their matching *_free function.
 */
#ifndef CGMKIT_H
#define CGMKIT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CGMK_API __declspec(dllexport)
#else
#define CGMK_API __attribute__((visibility("default")))
#endif

typedef enum cgmk_status {
  CGMK_OK = 0,
  CGMK_ERR_VALIDATION = 1,    /* bad arguments or inconsistent configuration */
  CGMK_ERR_IO = 2,            /* unreadable/unwritable file or directory */
  CGMK_ERR_CORRUPT = 3,       /* bad magic, truncation, version mismatch */
  CGMK_ERR_SHAPE_MISMATCH = 4,/* tensor shape disagrees with the grid */
  CGMK_ERR_HASH_MISMATCH = 5, /* artifact from a different environment */
  CGMK_ERR_DIVERGENCE = 6,    /* non-finite values during training */
  CGMK_ERR_INTERNAL = 7
} cgmk_status;

CGMK_API const char* cgmk_status_name(cgmk_status status);
CGMK_API const char* cgmk_last_error(void);

/* ---------------- environment synthesis ---------------- */

typedef struct cgmk_env cgmk_env;

typedef struct cgmk_env_config {
  double length_m, width_m, height_m;    /* region extents */
  double cell_x_m, cell_y_m, cell_z_m;   /* per-axis cell size */
  double alpha;                          /* footprint-to-area ratio target */
  double beta_per_km2;                   /* building density */
  double gamma_h_m;                      /* Rayleigh height scale */
  int building_count;                    /* <0: round(beta * area_km2) */
  int side_cells_min, side_cells_max;    /* <=0: sides derived from alpha */
  uint64_t seed;
  /* channel model */
  double k_db_los, k_db_nlos;
  double n_pl_los, n_pl_nlos;
  double sigma_sh_los, sigma_sh_nlos;
  double shadow_corr_len_m;
  double gamma_min_db, gamma_clip_db;
  double d_ref_m;
} cgmk_env_config;

typedef struct cgmk_env_info {
  int nx, ny, nz;
  int building_count;
  double achieved_alpha;
  int64_t occupied_cells;
} cgmk_env_info;

CGMK_API void cgmk_env_config_defaults(cgmk_env_config* cfg);
CGMK_API cgmk_status cgmk_env_generate(const cgmk_env_config* cfg, cgmk_env** out);
CGMK_API cgmk_status cgmk_env_load(const char* path, cgmk_env** out);
CGMK_API cgmk_status cgmk_env_save(const cgmk_env* env, const char* path);
CGMK_API cgmk_status cgmk_env_get_info(const cgmk_env* env, cgmk_env_info* info);
CGMK_API void cgmk_env_free(cgmk_env* env);

/* ---------------- dataset construction ---------------- */

typedef struct cgmk_dataset_config {
  int count;                      /* BS locations to sample */
  double mix_gbs, mix_sbs, mix_abs; /* per-type fractions, sum to 1 */
  int test_count;                 /* fixed test split size */
  uint64_t seed;
} cgmk_dataset_config;

CGMK_API void cgmk_dataset_config_defaults(cgmk_dataset_config* cfg);
CGMK_API cgmk_status cgmk_dataset_build(const cgmk_env* env, const cgmk_dataset_config* cfg,
                                        const char* out_dir);

/* ---------------- GAN training ---------------- */

typedef struct cgmk_train_config {
  int train_count;  /* <0: the full non-test pool */
  int epochs;
  double lr, beta1, beta2;
  double lambda_re;
  int batch;        /* <=0: min(16, ceil(train_count/10)) */
  uint64_t seed;
} cgmk_train_config;

typedef void (*cgmk_train_callback)(int epoch, double d_loss, double g_loss, double recon,
                                    void* user);

CGMK_API void cgmk_train_config_defaults(cgmk_train_config* cfg);
CGMK_API cgmk_status cgmk_train(const char* dataset_dir, const cgmk_train_config* cfg,
                                cgmk_train_callback callback, void* user, const char* out_ckpt);

/* ---------------- inference ---------------- */

CGMK_API cgmk_status cgmk_infer_gan(const char* ckpt_path, const double coord[3],
                                    const char* out_cgm);
CGMK_API cgmk_status cgmk_infer_idw(const char* dataset_dir, const double coord[3], int k,
                                    double p, const char* out_cgm);

/* ---------------- evaluation ---------------- */

typedef struct cgmk_eval_config {
  int k_min, k_max;      /* IDW sweep range, inclusive */
  double idw_p;
  const int* sweep_sizes; /* training-set sizes; NULL to skip */
  int sweep_size_count;
  uint64_t seed;
} cgmk_eval_config;

CGMK_API void cgmk_eval_config_defaults(cgmk_eval_config* cfg);
CGMK_API cgmk_status cgmk_eval(const char* dataset_dir, const char* ckpt_path,
                               const cgmk_eval_config* cfg, const char* out_dir);

/* ---------------- slice export ---------------- */

/* env_path supplies the grid pitch that maps metres to layers. Writes
 * <out_prefix>.ppm and <out_prefix>.csv. */
CGMK_API cgmk_status cgmk_slice(const char* cgm_path, const char* env_path, char axis,
                                double position, const char* out_prefix);

/* ---------------- CGM file inspection ---------------- */

typedef struct cgmk_cgm cgmk_cgm;

CGMK_API cgmk_status cgmk_cgm_load(const char* path, cgmk_cgm** out);
CGMK_API void cgmk_cgm_dims(const cgmk_cgm* cgm, int* nx, int* ny, int* nz);
CGMK_API void cgmk_cgm_bs(const cgmk_cgm* cgm, double coord[3]);
/* Dense gains in dB, x fastest then y then z. */
CGMK_API const float* cgmk_cgm_gains(const cgmk_cgm* cgm);
CGMK_API void cgmk_cgm_free(cgmk_cgm* cgm);

#ifdef __cplusplus
}
#endif

#endif /* CGMKIT_H */
