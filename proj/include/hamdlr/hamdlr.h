// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

// C interface to the hamdlr experiment runner. All functions are thread-compatible;
// the last error message is kept per thread.

#ifndef HAMDLR_HAMDLR_H_
#define HAMDLR_HAMDLR_H_

#include <stddef.h>

#if defined(_WIN32)
#define HAMDLR_API __declspec(dllexport)
#else
#define HAMDLR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hamdlr_status {
  HAMDLR_OK = 0,
  HAMDLR_E_DIMENSION = 1,
  HAMDLR_E_DEGENERATE_DIRECTION = 2,
  HAMDLR_E_STRUCTURE_VIOLATION = 3,
  HAMDLR_E_PARAMETER = 4,
  HAMDLR_E_STEP_FAILURE = 5,
  HAMDLR_E_RETRACTION_BREAKDOWN = 6,
  HAMDLR_E_INDICATOR_FAILURE = 7,
  HAMDLR_E_STALE_OPERATOR = 8,
  HAMDLR_E_UNSUPPORTED_MODEL = 9,
  HAMDLR_E_CONSTRUCTION = 10,
  HAMDLR_E_CONFIG = 11,
  HAMDLR_E_IO = 12,
  HAMDLR_E_INVALID_ARGUMENT = 100,
  HAMDLR_E_BUFFER_TOO_SMALL = 101,
  HAMDLR_E_INTERNAL = 102
} hamdlr_status;

typedef struct hamdlr_config hamdlr_config;
typedef struct hamdlr_result hamdlr_result;

// Undefined metrics are NaN.
typedef struct hamdlr_metrics_row {
  long step;
  double t;
  double E, E_H, E_perp;
  long two_n;  // -1 when undefined
  double indicator_norm;
  double wall_ms;
} hamdlr_metrics_row;

typedef struct hamdlr_summary {
  long steps;
  long final_two_n;
  long updates_applied;
  double runtime_seconds;    // method runtime (reference time excluded)
  double reference_seconds;  // inline reference stepping
  double max_orthogonality_defect;
  double max_symplecticity_defect;
} hamdlr_summary;

typedef void (*hamdlr_progress_fn)(long step, double t, void *user);

HAMDLR_API const char *hamdlr_version(void);
HAMDLR_API const char *hamdlr_status_string(hamdlr_status status);
// Message of the last failed call on this thread; empty when none.
HAMDLR_API const char *hamdlr_last_error(void);

HAMDLR_API void hamdlr_set_num_workers(int n);  // 0: library default
HAMDLR_API int hamdlr_num_workers(void);

HAMDLR_API size_t hamdlr_preset_count(void);
HAMDLR_API const char *hamdlr_preset_name(size_t index);  // NULL when out of range
// Copies the preset JSON (NUL-terminated) into buf; *needed receives the required size.
HAMDLR_API hamdlr_status hamdlr_preset_text(const char *name, char *buf, size_t capacity, size_t *needed);

HAMDLR_API hamdlr_status hamdlr_config_load(const char *path, hamdlr_config **out);
HAMDLR_API hamdlr_status hamdlr_config_parse(const char *text, hamdlr_config **out);
HAMDLR_API hamdlr_status hamdlr_config_from_preset(const char *name, hamdlr_config **out);
HAMDLR_API void hamdlr_config_destroy(hamdlr_config *config);
HAMDLR_API const char *hamdlr_config_name(const hamdlr_config *config);
HAMDLR_API const char *hamdlr_config_method(const hamdlr_config *config);
HAMDLR_API const char *hamdlr_config_output_dir(const hamdlr_config *config);

// On failure with an output directory, partial outputs are flushed before returning.
HAMDLR_API hamdlr_status hamdlr_run(const hamdlr_config *config, hamdlr_progress_fn progress, void *user,
                                    hamdlr_result **out);
HAMDLR_API void hamdlr_result_destroy(hamdlr_result *result);
HAMDLR_API hamdlr_status hamdlr_result_summary(const hamdlr_result *result, hamdlr_summary *out);
HAMDLR_API size_t hamdlr_result_metrics_count(const hamdlr_result *result);
HAMDLR_API hamdlr_status hamdlr_result_metrics_row(const hamdlr_result *result, size_t index,
                                                   hamdlr_metrics_row *out);

// Writes the comparison CSV to out_csv (may be NULL); *rows receives the number of sampled steps.
HAMDLR_API hamdlr_status hamdlr_compare(const char *full_run, const char *reduced_run, long stride,
                                        const char *out_csv, size_t *rows);
// Writes spectra.csv and eps_rank.csv into the run directory.
HAMDLR_API hamdlr_status hamdlr_analyze(const char *run_dir, const double *eps, size_t eps_count);
// Writes <run_dir>/rank_decrease/; *dropped is 1 when a pair was removed.
HAMDLR_API hamdlr_status hamdlr_rank_decrease(const char *run_dir, double threshold, long *two_n_after,
                                              int *dropped, double *ratio);

#ifdef __cplusplus
}
#endif

#endif  // HAMDLR_HAMDLR_H_
