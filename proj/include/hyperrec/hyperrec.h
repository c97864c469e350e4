/* Copyright 2026 The hyperrec Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* C interface of the hyperrec engine.
 *
 * Every function returns a hyperrec_status. On failure a description of the
 * error is kept per thread and can be read with hyperrec_last_error() until
 * the next call on that thread. Objects are opaque handles owned by the
 * caller and released with their matching *_destroy function; destroying
 * NULL is a no-op. */
#ifndef HYPERREC_H
#define HYPERREC_H

#include <stddef.h>

#if defined(_WIN32)
#define HYPERREC_API __declspec(dllexport)
#else
#define HYPERREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hyperrec_status {
  HYPERREC_OK = 0,
  HYPERREC_ERR_ARGUMENT = 1, /* null pointer, bad index, malformed request */
  HYPERREC_ERR_IO = 2,       /* missing or unwritable file or directory */
  HYPERREC_ERR_PARSE = 3,    /* malformed input file */
  HYPERREC_ERR_CONFIG = 4,   /* unknown key or inadmissible value */
  HYPERREC_ERR_NUMERIC = 5,  /* non-finite loss during training */
  HYPERREC_ERR_INTERNAL = 6  /* violated internal contract or other failure */
} hyperrec_status;

typedef struct hyperrec_config hyperrec_config;       /* training configuration */
typedef struct hyperrec_generator hyperrec_generator; /* synthetic corpus description */
typedef struct hyperrec_metrics hyperrec_metrics;     /* evaluation record */
typedef struct hyperrec_table hyperrec_table;         /* labelled rows of numbers */

HYPERREC_API const char* hyperrec_version(void);
HYPERREC_API const char* hyperrec_last_error(void);
HYPERREC_API const char* hyperrec_status_name(hyperrec_status status);

/* Training configuration. Keys and values use the config file syntax. */
HYPERREC_API hyperrec_status hyperrec_config_create(hyperrec_config** out);
HYPERREC_API hyperrec_status hyperrec_config_load(const char* path, hyperrec_config** out);
HYPERREC_API hyperrec_status hyperrec_config_set(hyperrec_config* config, const char* key,
                                                 const char* value);
/* Copies the value and its terminator into buf when it fits; *needed always
 * receives the required size including the terminator. */
HYPERREC_API hyperrec_status hyperrec_config_get(const hyperrec_config* config, const char* key,
                                                 char* buf, size_t capacity, size_t* needed);
HYPERREC_API hyperrec_status hyperrec_config_validate(const hyperrec_config* config);
HYPERREC_API void hyperrec_config_destroy(hyperrec_config* config);

/* Synthetic corpus generation. */
HYPERREC_API hyperrec_status hyperrec_generator_create(hyperrec_generator** out);
HYPERREC_API hyperrec_status hyperrec_generator_load(const char* path, hyperrec_generator** out);
HYPERREC_API hyperrec_status hyperrec_generator_set(hyperrec_generator* generator, const char* key,
                                                    const char* value);
/* Writes interactions.tsv, statements.tsv, alignment.tsv and clusters.tsv. */
HYPERREC_API hyperrec_status hyperrec_generate(const hyperrec_generator* generator,
                                               const char* out_dir);
HYPERREC_API void hyperrec_generator_destroy(hyperrec_generator* generator);

/* Trains on a dataset directory into a run directory and evaluates the best
 * checkpoint on the test split. resume != 0 continues an interrupted run.
 * metrics may be NULL. */
HYPERREC_API hyperrec_status hyperrec_train(const char* dataset_dir, const char* run_dir,
                                            const hyperrec_config* config, int resume,
                                            hyperrec_metrics** metrics);
/* Re-evaluates a run; out_dir NULL writes next to the run. metrics may be NULL. */
HYPERREC_API hyperrec_status hyperrec_evaluate(const char* run_dir, const char* out_dir,
                                               hyperrec_metrics** metrics);

/* Scalar names: recall, ndcg, users, mad_users, mad_items. */
HYPERREC_API hyperrec_status hyperrec_metrics_get(const hyperrec_metrics* metrics,
                                                  const char* name, double* value);
HYPERREC_API hyperrec_status hyperrec_metrics_group_count(const hyperrec_metrics* metrics,
                                                          size_t* count);
HYPERREC_API hyperrec_status hyperrec_metrics_group_recall(const hyperrec_metrics* metrics,
                                                           size_t group, double* value);
HYPERREC_API void hyperrec_metrics_destroy(hyperrec_metrics* metrics);

/* Ablation battery. variants is a comma list of sa, dh, ssl (NULL for all);
 * the full model always runs. Columns: recall, ndcg, mad_users, mad_items,
 * sparsest_recall. table may be NULL. */
HYPERREC_API hyperrec_status hyperrec_ablate(const char* dataset_dir, const char* out_dir,
                                             const hyperrec_config* config, const char* variants,
                                             size_t seeds, hyperrec_table** table);

/* Sensitivity sweep. grid lists parameters separated by ';', each either a
 * bare name (its full search grid) or name=v1,v2,...; e.g. "tau;layers=1,2".
 * Row labels are name=value. Columns: recall, ndcg. table may be NULL. */
HYPERREC_API hyperrec_status hyperrec_sweep(const char* dataset_dir, const char* out_dir,
                                            const hyperrec_config* config, const char* grid,
                                            hyperrec_table** table);

HYPERREC_API size_t hyperrec_table_rows(const hyperrec_table* table);
HYPERREC_API size_t hyperrec_table_cols(const hyperrec_table* table);
/* Returned strings live as long as the table. NULL on a bad index. */
HYPERREC_API const char* hyperrec_table_label(const hyperrec_table* table, size_t row);
HYPERREC_API const char* hyperrec_table_column(const hyperrec_table* table, size_t col);
HYPERREC_API hyperrec_status hyperrec_table_value(const hyperrec_table* table, size_t row,
                                                  size_t col, double* value);
HYPERREC_API void hyperrec_table_destroy(hyperrec_table* table);

#ifdef __cplusplus
}
#endif

#endif /* HYPERREC_H */
