/*
 * wsvad - weakly-supervised video anomaly detection toolkit, C API.
 *
 * All functions return wsvad_status; WSVAD_OK means success. On failure a
 * human-readable message is kept in thread-local storage and can be read
 * with wsvad_last_error() until the next failing call on the same thread.
 *
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching *_free function. Strings returned through
 * char** out-parameters are released with wsvad_string_free.
 *
 * Structured configuration (training, synthetic generation) is passed as a
 * JSON object string; unknown keys are rejected, missing keys take their
 * documented defaults.
 */

#ifndef WSVAD_H
#define WSVAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wsvad_status {
  WSVAD_OK = 0,
  WSVAD_ERROR_ARGUMENT = 1,   /* invalid argument or configuration */
  WSVAD_ERROR_IO = 2,         /* file system failure */
  WSVAD_ERROR_FORMAT = 3,     /* malformed file contents */
  WSVAD_ERROR_VALIDATION = 4, /* manifest or data validation failure */
  WSVAD_ERROR_SHAPE = 5,      /* dimension mismatch */
  WSVAD_ERROR_INTERNAL = 6
} wsvad_status;

typedef enum wsvad_ftb_mode {
  WSVAD_FTB_M1 = 1, /* spatial passthrough */
  WSVAD_FTB_M2 = 2, /* temporal regularity + its temporal DCT */
  WSVAD_FTB_M3 = 3  /* temporal regularity + sigmoid-activated input */
} wsvad_ftb_mode;

const char* wsvad_version(void);
const char* wsvad_status_name(wsvad_status status);
const char* wsvad_last_error(void);
void wsvad_string_free(char* s);

/* ---- feature sequences (T x D float matrices, ".ftbf" on disk) ---- */

typedef struct wsvad_features wsvad_features;

wsvad_status wsvad_features_create(const float* data, uint32_t rows, uint32_t cols,
                                   wsvad_features** out);
wsvad_status wsvad_features_read(const char* path, wsvad_features** out);
wsvad_status wsvad_features_write(const wsvad_features* features, const char* path);
uint32_t wsvad_features_rows(const wsvad_features* features);
uint32_t wsvad_features_cols(const wsvad_features* features);
/* Copies the matrix, row-major, into out (rows*cols floats). */
wsvad_status wsvad_features_copy_data(const wsvad_features* features, float* out, size_t out_len);
wsvad_status wsvad_features_snippetize(const wsvad_features* features, uint32_t snippet_len,
                                       wsvad_features** out);
/* dct_lowpass_cutoff of 0 keeps all coefficients (m2 only, experimental). */
wsvad_status wsvad_features_transform(const wsvad_features* features, wsvad_ftb_mode mode,
                                      uint32_t dct_lowpass_cutoff, wsvad_features** out);
void wsvad_features_free(wsvad_features* features);

/* Whole-file transform: decode, apply the transformation block, encode. */
wsvad_status wsvad_transform_file(const char* input_path, const char* output_path,
                                  wsvad_ftb_mode mode, uint32_t dct_lowpass_cutoff);

/* ---- manifests (".jsonl", one entry per line) ---- */

typedef struct wsvad_manifest wsvad_manifest;

wsvad_status wsvad_manifest_read(const char* path, wsvad_manifest** out);
size_t wsvad_manifest_size(const wsvad_manifest* manifest);
/* Validation violations as a JSON array string (empty array = valid).
 * deep != 0 also decodes every referenced feature file, resolving relative
 * paths against base_dir (NULL = directory of the manifest as loaded). */
wsvad_status wsvad_manifest_validate(const wsvad_manifest* manifest, const char* base_dir,
                                     int deep, char** report_json_out);
void wsvad_manifest_free(wsvad_manifest* manifest);

/* Assembles and writes a manifest from anomalous/normal source pools
 * (JSONL files). test_fraction of the interval-annotated anomalous sources
 * is assigned to the test split by a seeded draw; explicit "split" fields in
 * the sources override the draw. */
wsvad_status wsvad_build_manifest(const char* anomalous_sources_path,
                                  const char* normal_sources_path, double test_fraction,
                                  uint64_t seed, const char* base_dir, const char* out_path);

/* ---- synthetic data ----
 * config_json keys (all optional): n_normal, n_anomaly, frames, dim,
 * anomaly_len, magnitude_boost, noise_sigma, seed.
 * Writes feature files plus manifest.jsonl under out_dir and returns the
 * manifest path. */
wsvad_status wsvad_synth_generate(const char* config_json, const char* out_dir,
                                  char** manifest_path_out);

/* ---- training / scoring / evaluation ----
 * train config_json keys (all optional): top_k, margin, magnitude_weight,
 * smoothness_weight, sparsity_weight, learning_rate, momentum, epochs,
 * snippet_len, seed, ftb_mode ("m1"|"m2"|"m3"), dct_lowpass, branch_dim,
 * dilations, kernel_size, scorer_hidden, model_seed.
 * Writes checkpoint.wsck and history.jsonl under out_dir. */
wsvad_status wsvad_train(const char* manifest_path, const char* base_dir,
                         const char* config_json, const char* out_dir);

/* Scores every video of the chosen split ("test", "train", "all") with a
 * saved checkpoint; writes one <video_id>.csv per video under out_dir. */
wsvad_status wsvad_score(const char* checkpoint_path, const char* manifest_path,
                         const char* base_dir, const char* split, const char* out_dir);

/* Frame-level evaluation of score CSVs against the manifest's test split.
 * Writes the report JSON to report_path and, when heatmap_dir is non-NULL,
 * one heatmap CSV per test video. macro_average and cross_class_negatives
 * toggle the documented protocol variants. overall_auc_out may be NULL. */
wsvad_status wsvad_evaluate(const char* manifest_path, const char* scores_dir,
                            const char* report_path, const char* heatmap_dir,
                            int macro_average, int cross_class_negatives,
                            double* overall_auc_out);

/* ---- metrics ---- */

/* ROC-AUC with ties counted 1/2; labels are 0/1 and both classes must be
 * present. */
wsvad_status wsvad_roc_auc(const double* scores, const int32_t* labels, size_t len,
                           double* auc_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WSVAD_H */
