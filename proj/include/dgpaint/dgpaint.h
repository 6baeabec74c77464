/* dgpaint: GAN-driven diffusion inpainting. Plain C interface.
 *
 * Every function returning dgp_status reports failure through the status
 * code; the message of the most recent failure on the calling thread is
 * available from dgp_last_error(). Handles are opaque and owned by the
 * caller once returned; release them with the matching *_free function
 * (NULL is accepted everywhere a handle is freed).
 *
 * Images are planar float32 (C,H,W) with values in [-1, 1]. Masks are
 * (H,W) with 1 = hole (to be generated) and 0 = known.
 */
#ifndef DGPAINT_H
#define DGPAINT_H

#include <stddef.h>
#include <stdint.h>

#if defined(DGP_BUILDING_LIBRARY)
#define DGP_API __attribute__((visibility("default")))
#else
#define DGP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dgp_status {
    DGP_OK = 0,
    DGP_ERR_INVALID_ARGUMENT = 1,
    DGP_ERR_SHAPE = 2,
    DGP_ERR_IO = 3,
    DGP_ERR_FORMAT = 4,
    DGP_ERR_CHECKSUM = 5,
    DGP_ERR_VERSION = 6,
    DGP_ERR_MISSING_TENSOR = 7,
    DGP_ERR_KIND = 8,
    DGP_ERR_DIVERGED = 9,
    DGP_ERR_CONFIG = 10,
    DGP_ERR_NUMERIC = 11,
    DGP_ERR_INTERNAL = 100
} dgp_status;

typedef struct dgp_config dgp_config;
typedef struct dgp_image dgp_image;
typedef struct dgp_mask dgp_mask;
typedef struct dgp_model dgp_model;
typedef struct dgp_report dgp_report;

/* Model-evaluation accounting of one sampling call. */
typedef struct dgp_trace {
    uint64_t generator_evals;
    uint64_t epsnet_evals;
    double wall_ms;
} dgp_trace;

/* Called once per training step (value = loss) or per evaluated sample. */
typedef void (*dgp_progress_fn)(void* user, int step, int total, double value);

DGP_API const char* dgp_version(void);
DGP_API const char* dgp_last_error(void);
DGP_API const char* dgp_status_name(dgp_status status);

/* ---- configuration: `key = value` lines, '#' comments ---- */
DGP_API dgp_status dgp_config_create(dgp_config** out);
DGP_API dgp_status dgp_config_load(const char* path, dgp_config** out);
DGP_API dgp_status dgp_config_save(const dgp_config* cfg, const char* path);
DGP_API dgp_status dgp_config_set(dgp_config* cfg, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf; *needed receives the size
 * including the terminator. Fails with DGP_ERR_INVALID_ARGUMENT if cap is too small. */
DGP_API dgp_status dgp_config_get(const dgp_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
DGP_API void dgp_config_free(dgp_config* cfg);

/* ---- images (binary PGM/PPM, maxval 255) ---- */
DGP_API dgp_status dgp_image_create(int channels, int height, int width, const float* values, dgp_image** out);
DGP_API dgp_status dgp_image_load(const char* path, dgp_image** out);
DGP_API dgp_status dgp_image_save(const dgp_image* img, const char* path);
DGP_API dgp_status dgp_image_shape(const dgp_image* img, int* channels, int* height, int* width);
DGP_API const float* dgp_image_data(const dgp_image* img);
DGP_API void dgp_image_free(dgp_image* img);

/* ---- masks (PGM: 0 = known, 255 = hole) ---- */
DGP_API dgp_status dgp_mask_create(int height, int width, const float* values, dgp_mask** out);
DGP_API dgp_status dgp_mask_load(const char* path, dgp_mask** out);
DGP_API dgp_status dgp_mask_save(const dgp_mask* mask, const char* path);
/* family: "box", "stroke", "half", "bernoulli", "zeros" or "ones". */
DGP_API dgp_status dgp_mask_generate(const char* family, int height, int width, uint64_t seed, dgp_mask** out);
DGP_API dgp_status dgp_mask_shape(const dgp_mask* mask, int* height, int* width);
DGP_API const float* dgp_mask_data(const dgp_mask* mask);
DGP_API void dgp_mask_free(dgp_mask* mask);

DGP_API dgp_status dgp_apply_mask(const dgp_image* img, const dgp_mask* mask, dgp_image** out);
/* original | masked | result with 2-pixel white separators. */
DGP_API dgp_status dgp_montage(const dgp_image* original, const dgp_image* masked, const dgp_image* result,
                               dgp_image** out);
DGP_API dgp_status dgp_psnr(const dgp_image* a, const dgp_image* b, double* out_db);
DGP_API dgp_status dgp_masked_mse(const dgp_image* a, const dgp_image* b, const dgp_mask* mask, double* out);

/* ---- models (checkpoint files, magic "DGPT") ---- */
DGP_API dgp_status dgp_model_load(const char* path, dgp_model** out);
DGP_API dgp_status dgp_model_save(const dgp_model* model, const char* path);
/* "generator" or "epsilon_net". */
DGP_API const char* dgp_model_kind(const dgp_model* model);
DGP_API void dgp_model_free(dgp_model* model);

/* ---- workflows ---- */
/* Writes <dir>/train and <dir>/test image sets. */
DGP_API dgp_status dgp_generate_dataset(const dgp_config* cfg, const char* dir);
/* data_dir may be NULL: the training split is then generated from cfg. */
DGP_API dgp_status dgp_train_ddpm(const dgp_config* cfg, const char* data_dir, const char* out_path,
                                  dgp_progress_fn progress, void* user);
DGP_API dgp_status dgp_train_gan(const dgp_config* cfg, const char* data_dir, const char* out_path,
                                 dgp_progress_fn progress, void* user);

/* GAN-driven denoising loop followed by mask compositing. loop_model is the
 * epsilon-net checkpoint when cfg selects drift_model = epsilon_net, else NULL.
 * trace may be NULL. */
DGP_API dgp_status dgp_inpaint(const dgp_model* generator, const dgp_model* loop_model, const dgp_image* img,
                               const dgp_mask* mask, const dgp_config* cfg, dgp_image** out, dgp_trace* trace);
/* DDPM ancestral sampling with known-region projection. */
DGP_API dgp_status dgp_baseline_inpaint(const dgp_model* epsilon_net, const dgp_image* img, const dgp_mask* mask,
                                        const dgp_config* cfg, dgp_image** out, dgp_trace* trace);

/* Sweeps the configured mask families x methods over the test split.
 * Either model may be NULL when no configured method needs it. */
DGP_API dgp_status dgp_evaluate(const dgp_config* cfg, const char* data_dir, const dgp_model* generator,
                                const dgp_model* epsilon_net, dgp_progress_fn progress, void* user, dgp_report** out);
DGP_API dgp_status dgp_report_save_csv(const dgp_report* report, const char* path);
DGP_API size_t dgp_report_row_count(const dgp_report* report);
/* Fraction of samples where `method` beats mean_fill on masked MSE. */
DGP_API dgp_status dgp_report_win_rate(const dgp_report* report, const char* method, const char* family, double* out);
DGP_API dgp_status dgp_report_mean_mse(const dgp_report* report, const char* method, const char* family, double* out);
/* Sum of model evaluations recorded for `method` across all rows. */
DGP_API dgp_status dgp_report_total_evals(const dgp_report* report, const char* method, uint64_t* generator_evals,
                                          uint64_t* epsnet_evals);
DGP_API void dgp_report_free(dgp_report* report);

#ifdef __cplusplus
}
#endif

#endif /* DGPAINT_H */
