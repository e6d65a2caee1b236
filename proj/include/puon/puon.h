/*
 * C interface to the PUON drug-disease association library.
 *
 * Every function returns a puon_status; PUON_OK is zero. On failure the
 * message for the calling thread is available from puon_last_error() until
 * the next failing call on that thread. Objects are opaque and owned by the
 * caller once created; release them with the matching *_destroy function.
 * Indices are 0-based.
 */
#ifndef PUON_PUON_H_
#define PUON_PUON_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PUON_BUILDING_LIBRARY)
#    define PUON_API __declspec(dllexport)
#  else
#    define PUON_API __declspec(dllimport)
#  endif
#else
#  define PUON_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum puon_status {
  PUON_OK = 0,
  PUON_ERR_INVALID_ARGUMENT = 1,
  PUON_ERR_IO = 2,
  PUON_ERR_PARSE = 3,
  PUON_ERR_SHAPE = 4,
  PUON_ERR_VALIDATION = 5,
  PUON_ERR_CONFIG = 6,
  PUON_ERR_NUMERIC = 7,
  PUON_ERR_EMPTY_TEST = 8,
  PUON_ERR_NO_NEIGHBOR = 9,
  PUON_ERR_UNDEFINED_METRIC = 10,
  PUON_ERR_UNKNOWN_ID = 11,
  PUON_ERR_CHECK_FAILED = 12,
  PUON_ERR_INTERNAL = 99
} puon_status;

typedef struct puon_config puon_config;
typedef struct puon_dataset puon_dataset;
typedef struct puon_model puon_model;
typedef struct puon_run puon_run;

PUON_API const char* puon_version(void);
PUON_API const char* puon_status_string(puon_status status);
PUON_API const char* puon_last_error(void);

/* ---- configuration ---------------------------------------------------- */

/* A fresh configuration holds the library defaults. */
PUON_API puon_status puon_config_create(puon_config** out);
PUON_API void puon_config_destroy(puon_config* cfg);

/* Applies a JSON config document on top of the current values. Relative
 * data paths in the file resolve against the file's directory. */
PUON_API puon_status puon_config_load(puon_config* cfg, const char* path);

/* Sets one key (JSON config key, e.g. "h", "lr", "pi_p") from text. */
PUON_API puon_status puon_config_set(puon_config* cfg, const char* key,
                                     const char* value);

/* Copies the textual value of `key` into buf (NUL-terminated). *needed, if
 * non-NULL, receives the required size including the terminator. */
PUON_API puon_status puon_config_get(const puon_config* cfg, const char* key,
                                     char* buf, size_t cap, size_t* needed);

/* 16 hex digits plus NUL. */
PUON_API puon_status puon_config_fingerprint(const puon_config* cfg,
                                             char out[17]);

/* ---- datasets ----------------------------------------------------------- */

/* Loads the association matrix, drug similarity and optional disease
 * similarity / id files named by the configuration. */
PUON_API puon_status puon_dataset_load(const puon_config* cfg,
                                       puon_dataset** out);
PUON_API void puon_dataset_destroy(puon_dataset* data);
PUON_API puon_status puon_dataset_shape(const puon_dataset* data,
                                        size_t* n_drugs, size_t* n_diseases,
                                        size_t* n_positives);
PUON_API puon_status puon_dataset_count_single_drugs(const puon_dataset* data,
                                                     size_t* out);

/* ---- experiments -------------------------------------------------------- */

typedef struct puon_fold_metrics {
  uint64_t seed;
  size_t repeat;
  size_t fold;
  double auc;
  double aupr;
  double f1;
  double f1_max;
  size_t n_test_pos;
  size_t n_test_neg;
  size_t epochs;
  double final_risk;
} puon_fold_metrics;

/* Repeated k-fold cross-validation; writes reports, logs and (optionally)
 * checkpoints under <output_dir>/{reports,logs,checkpoints}/<fingerprint>. */
PUON_API puon_status puon_run_cv(const puon_config* cfg,
                                 const puon_dataset* data, puon_run** out);
/* New-drug split, one training per seed. Same output layout. */
PUON_API puon_status puon_run_newdrug(const puon_config* cfg,
                                      const puon_dataset* data,
                                      puon_run** out);
PUON_API void puon_run_destroy(puon_run* run);
PUON_API size_t puon_run_count(const puon_run* run);
PUON_API puon_status puon_run_metrics(const puon_run* run, size_t index,
                                      puon_fold_metrics* out);
PUON_API puon_status puon_run_hit_ratio(const puon_run* run, size_t index,
                                        size_t k, double* out);
PUON_API puon_status puon_run_report_dir(const puon_run* run, char* buf,
                                         size_t cap, size_t* needed);

/* ---- models --------------------------------------------------------------- */

/* Trains on every validated association of `data`. `log_path` may be NULL;
 * otherwise it receives one tab-separated line per epoch. */
PUON_API puon_status puon_model_train(const puon_config* cfg,
                                      const puon_dataset* data,
                                      const char* log_path, puon_model** out);
PUON_API puon_status puon_model_load(const char* path, puon_model** out);
PUON_API puon_status puon_model_save(const puon_model* model, const char* path);
PUON_API void puon_model_destroy(puon_model* model);

/* Probability that drug i treats disease j, with embeddings taken from the
 * dataset's association matrix. */
PUON_API puon_status puon_model_predict(const puon_model* model,
                                        const puon_dataset* data, size_t drug,
                                        size_t disease, double* out);

typedef struct puon_recommendation {
  const char* drug_id;    /* owned by the dataset */
  const char* disease_id; /* owned by the dataset */
  size_t drug_index;
  size_t disease_index;
  size_t rank; /* 1-based */
  double score;
} puon_recommendation;

/* Top `top_k` diseases not yet associated with each listed drug, best
 * first. `rows` must hold n_drugs * top_k entries; *written receives the
 * number filled. */
PUON_API puon_status puon_recommend(const puon_model* model,
                                    const puon_dataset* data,
                                    const char* const* drug_ids, size_t n_drugs,
                                    size_t top_k, puon_recommendation* rows,
                                    size_t cap, size_t* written);

/* ---- self checks -------------------------------------------------------- */

typedef void (*puon_check_callback)(const char* name, int passed,
                                    const char* detail, void* user);

/* Runs the built-in numerical checks. Returns PUON_ERR_CHECK_FAILED if any
 * check fails; *n_failed (optional) receives the count. */
PUON_API puon_status puon_run_checks(uint64_t seed, puon_check_callback cb,
                                     void* user, size_t* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* PUON_PUON_H_ */
