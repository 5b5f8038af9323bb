/*
 * Copyright 2026 The corrprobe Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to corrprobe: in-advance correctness probes on cached LLM
 * activations.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a cp_status; on
 * failure the context keeps a human-readable message until its next call.
 * A context must not be used from two threads at once; handles are
 * immutable once built, except through the explicit in-place calls
 * (cp_dataset_set_model_id, cp_dataset_exclude_ids, cp_dataset_head).
 */
#ifndef CORRPROBE_H
#define CORRPROBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CORRPROBE_BUILDING)
#    define CP_API __declspec(dllexport)
#  else
#    define CP_API __declspec(dllimport)
#  endif
#else
#  define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_E_INVALID_ARGUMENT = 1,
  CP_E_IO = 2,
  CP_E_BAD_MAGIC = 3,
  CP_E_UNSUPPORTED_VERSION = 4,
  CP_E_UNSUPPORTED_DTYPE = 5,
  CP_E_BAD_HEADER = 6,
  CP_E_TRUNCATED = 7,
  CP_E_TRAILING_DATA = 8,
  CP_E_NON_FINITE = 9,
  CP_E_SIZE_OVERFLOW = 10,
  CP_E_COUNT_MISMATCH = 11,
  CP_E_DUPLICATE_ID = 12,
  CP_E_MALFORMED_RECORD = 13,
  CP_E_LABEL_CONTRADICTION = 14,
  CP_E_EMPTY_CLASS = 15,
  CP_E_DEGENERATE_DIRECTION = 16,
  CP_E_DIMENSION_MISMATCH = 17,
  CP_E_SCHEMA = 18,
  CP_E_SINGLE_CLASS = 19,
  CP_E_NAN_SCORE = 20,
  CP_E_CLASS_TOO_SMALL = 21,
  CP_E_INCONSISTENT_LAYERS = 22,
  CP_E_INVALID_SPEC = 23,
  CP_E_INTERNAL = 24
} cp_status;

typedef enum cp_fold_strategy {
  CP_FOLDS_STRATIFIED_SHUFFLED = 0,
  CP_FOLDS_SEQUENTIAL = 1
} cp_fold_strategy;

typedef struct cp_context cp_context;
typedef struct cp_dataset cp_dataset;
typedef struct cp_direction cp_direction;
typedef struct cp_logreg cp_logreg;

typedef struct cp_matrix_info {
  uint32_t layer;
  uint64_t d;
  uint64_t n;
} cp_matrix_info;

typedef struct cp_dataset_info {
  uint32_t layer;
  uint64_t d;
  uint64_t n;
  uint64_t n_true;
  uint64_t n_false;
  uint64_t n_idk;
  int labeled; /* 0 when loaded without a metadata sidecar */
} cp_dataset_info;

typedef struct cp_direction_info {
  uint32_t layer;
  uint64_t d;
  uint64_t n_true;
  uint64_t n_false;
  double w_norm;
} cp_direction_info;

typedef struct cp_protocol {
  unsigned k;
  uint64_t seed;
  cp_fold_strategy strategy;
} cp_protocol;

typedef struct cp_eval_summary {
  double mean;
  double std;
  unsigned folds;
} cp_eval_summary;

typedef struct cp_logreg_options {
  double l2_lambda; /* default 1.0 */
  double tol;       /* default 1e-6 */
  unsigned max_iter; /* default 1000 */
} cp_logreg_options;

typedef struct cp_logreg_info {
  uint64_t d;
  int converged;
  unsigned iterations;
  double grad_inf_norm;
  double l2_lambda;
} cp_logreg_info;

typedef struct cp_gaussian_spec {
  uint64_t d;
  uint64_t n_per_class;
  double delta;
  double sigma_true;
  double sigma_false;
  const double* axis; /* NULL: random unit axis drawn from axis_seed */
  uint64_t axis_seed;
  uint64_t seed;
  double idk_fraction;
  double idk_shift;
  uint32_t layer; /* written into the generated matrix */
} cp_gaussian_spec;

/* ---- library ----------------------------------------------------------- */

CP_API const char* cp_version(void);
CP_API const char* cp_status_name(cp_status status);

CP_API cp_context* cp_context_create(void);
CP_API void cp_context_destroy(cp_context* ctx);
/* Worker threads for parallel jobs; results never depend on this. */
CP_API void cp_context_set_jobs(cp_context* ctx, unsigned jobs);
CP_API const char* cp_context_last_error(const cp_context* ctx);

CP_API cp_status cp_file_sha256(cp_context* ctx, const char* path, char out_hex[65]);

/* ---- activation store -------------------------------------------------- */

/* Streams an ACTV1 file and checks header, length and finiteness. */
CP_API cp_status cp_matrix_validate(cp_context* ctx, const char* path, cp_matrix_info* info);
/* Converts a headerless little-endian f32 dump to ACTV1. */
CP_API cp_status cp_matrix_import_raw_f32(cp_context* ctx, const char* raw_path, uint64_t d,
                                          uint32_t layer, const char* out_path, cp_matrix_info* info);

/* meta_path may be NULL for an unlabeled dataset (scoring only). */
CP_API cp_status cp_dataset_load(cp_context* ctx, const char* actv_path, const char* meta_path,
                                 cp_dataset** out);
/* meta_path may be NULL to write the activations only. */
CP_API cp_status cp_dataset_save(cp_context* ctx, const cp_dataset* ds, const char* actv_path,
                                 const char* meta_path);
CP_API cp_status cp_dataset_info_get(const cp_dataset* ds, cp_dataset_info* info);
CP_API const char* cp_dataset_id(const cp_dataset* ds);
CP_API cp_status cp_dataset_set_model_id(cp_dataset* ds, const char* model_id);
/* Drops every sample whose sample_id appears in the given metadata file. */
CP_API cp_status cp_dataset_exclude_ids(cp_context* ctx, cp_dataset* ds, const char* meta_path);
/* Keeps the first n samples. */
CP_API cp_status cp_dataset_head(cp_context* ctx, cp_dataset* ds, uint64_t n);
CP_API void cp_dataset_free(cp_dataset* ds);

/* ---- probe ------------------------------------------------------------- */

CP_API cp_status cp_direction_fit(cp_context* ctx, const cp_dataset* ds, cp_direction** out);
CP_API cp_status cp_direction_load(cp_context* ctx, const char* path, cp_direction** out);
CP_API cp_status cp_direction_save(cp_context* ctx, const cp_direction* dir, const char* path);
CP_API cp_status cp_direction_info_get(const cp_direction* dir, cp_direction_info* info);
/* Copies w and mu (either may be NULL); len must equal d. */
CP_API cp_status cp_direction_vectors(cp_context* ctx, const cp_direction* dir, double* w, double* mu,
                                      size_t len);
CP_API cp_status cp_direction_score(cp_context* ctx, const cp_direction* dir, const double* h,
                                    size_t len, double* out);
/* out must hold n scores. */
CP_API cp_status cp_direction_score_dataset(cp_context* ctx, const cp_direction* dir,
                                            const cp_dataset* ds, double* out, size_t len);
CP_API void cp_direction_free(cp_direction* dir);

/* ---- metrics ----------------------------------------------------------- */

CP_API cp_status cp_auroc(cp_context* ctx, const double* scores, const uint8_t* labels, size_t n,
                          double* out);
/* Single-split evaluation of a fitted direction; csv_path may be NULL. */
CP_API cp_status cp_eval(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds,
                         const char* csv_path, double* auroc);
CP_API cp_status cp_cv(cp_context* ctx, const cp_dataset* ds, const cp_protocol* protocol,
                       const char* csv_path, cp_eval_summary* out);

/* ---- experiments ------------------------------------------------------- */

CP_API cp_status cp_write_scores(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds,
                                 const char* csv_path);
CP_API cp_status cp_sweep(cp_context* ctx, const cp_dataset* const* layers, size_t count,
                          const cp_protocol* protocol, const char* csv_path, uint32_t* best_layer);
/* directions_dir, when not NULL, receives one fold-averaged direction per
 * training dataset, named <dataset_id>.direction.json. */
CP_API cp_status cp_cross(cp_context* ctx, const cp_dataset* const* datasets, size_t count,
                          const cp_protocol* protocol, const char* csv_path, const char* directions_dir);
/* sizes may be NULL (count 0) for the default doubling grid. */
CP_API cp_status cp_curve(cp_context* ctx, const cp_dataset* train, const cp_dataset* const* tests,
                          size_t test_count, const uint64_t* sizes, size_t size_count, unsigned reps,
                          uint64_t seed, const char* csv_path);
/* names may be NULL (training dataset ids are used); out_matrix, when not
 * NULL, receives count*count row-major entries. csv_path may be NULL. */
CP_API cp_status cp_cosine(cp_context* ctx, const cp_direction* const* dirs, const char* const* names,
                           size_t count, const char* csv_path, double* out_matrix);
CP_API cp_status cp_idk_report(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds,
                               const char* summary_csv, const char* histogram_csv);
CP_API cp_status cp_extremes(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds,
                             uint64_t top_k, const char* csv_path);

/* ---- baselines --------------------------------------------------------- */

CP_API void cp_logreg_options_init(cp_logreg_options* options);
CP_API cp_status cp_logreg_fit(cp_context* ctx, const cp_dataset* embeddings,
                               const cp_logreg_options* options, cp_logreg** out);
CP_API cp_status cp_logreg_load(cp_context* ctx, const char* path, cp_logreg** out);
CP_API cp_status cp_logreg_save(cp_context* ctx, const cp_logreg* model, const char* path);
CP_API cp_status cp_logreg_info_get(const cp_logreg* model, cp_logreg_info* info);
CP_API cp_status cp_logreg_predict(cp_context* ctx, const cp_logreg* model, const cp_dataset* embeddings,
                                   double* out, size_t len);
CP_API cp_status cp_logreg_eval(cp_context* ctx, const cp_logreg* model, const cp_dataset* embeddings,
                                const char* csv_path, double* auroc);
CP_API void cp_logreg_free(cp_logreg* model);
/* Cross-dataset grid for the assessor on the same fold protocol as cp_cross. */
CP_API cp_status cp_assessor_cross(cp_context* ctx, const cp_dataset* const* datasets, size_t count,
                                   const cp_protocol* protocol, const cp_logreg_options* options,
                                   const char* csv_path);
/* Missing confidences are imputed at 50 when impute != 0, dropped otherwise. */
CP_API cp_status cp_verbal_eval(cp_context* ctx, const char* meta_path, int impute, const char* csv_path,
                                double* auroc, uint64_t* used, uint64_t* imputed);

/* ---- synthetic data ---------------------------------------------------- */

CP_API void cp_gaussian_spec_init(cp_gaussian_spec* spec);
CP_API cp_status cp_synth_generate(cp_context* ctx, const cp_gaussian_spec* spec, cp_dataset** out);
CP_API cp_status cp_analytic_auc(cp_context* ctx, double delta, double sigma_true, double sigma_false,
                                 double* out);

#ifdef __cplusplus
}
#endif

#endif /* CORRPROBE_H */
