#ifndef UWBSYNC_H
#define UWBSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UwbStatus {
  UWB_STATUS_OK = 0,
  UWB_STATUS_NULL_POINTER = 1,
  UWB_STATUS_INVALID_UTF8 = 2,
  UWB_STATUS_CONFIG = 3,
  UWB_STATUS_RUNTIME = 4,
  UWB_STATUS_IO = 5,
  UWB_STATUS_OUT_OF_RANGE = 6,
  UWB_STATUS_PANIC = 7,
} UwbStatus;

typedef enum UwbMode {
  UWB_MODE_NDA = 0,
  UWB_MODE_DA = 1,
} UwbMode;

typedef enum UwbEstimator {
  UWB_ESTIMATOR_COARSE_ONLY = 0,
  UWB_ESTIMATOR_TWO_STAGE = 1,
} UwbEstimator;

// Opaque metrics table handle.
typedef struct UwbMetrics UwbMetrics;

// Opaque scenario handle.
typedef struct UwbScenario UwbScenario;

// Offsets and circular errors in ns.
typedef struct UwbTrialResult {
  double true_tau;
  double tau1;
  double tau2;
  double err_coarse;
  double err_fine;
  uint64_t seed;
} UwbTrialResult;

// One aggregated sweep point. `snr_db` is `INFINITY` for noiseless rows.
typedef struct UwbMetricsRow {
  double snr_db;
  uint32_t m;
  enum UwbMode mode;
  enum UwbEstimator estimator;
  uint32_t n_users;
  double normalized_mse;
  double p_acq;
  uint64_t trials;
  double ci_halfwidth;
} UwbMetricsRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a scenario file into a new handle stored in `*out`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum UwbStatus uwb_scenario_from_file(const char *path, struct UwbScenario **out);

// Parses scenario text into a new handle stored in `*out`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum UwbStatus uwb_scenario_from_str(const char *text, struct UwbScenario **out);

// Loads a bundled scenario: `"paper_cm1"` or `"desk"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum UwbStatus uwb_scenario_bundled(const char *name, struct UwbScenario **out);

// # Safety
// `scenario` must be null or a handle from this library not yet freed.
void uwb_scenario_free(struct UwbScenario *scenario);

// # Safety
// `scenario` must be a live handle.
enum UwbStatus uwb_scenario_set_seed(struct UwbScenario *scenario, uint64_t seed);

// # Safety
// `scenario` must be a live handle.
enum UwbStatus uwb_scenario_set_trials(struct UwbScenario *scenario, size_t trials);

// Replaces the SNR points; `INFINITY` selects a noiseless point.
//
// # Safety
// `scenario` must be a live handle and `snr_db` point to `len` doubles.
enum UwbStatus uwb_scenario_set_snr_points(struct UwbScenario *scenario,
                                           const double *snr_db,
                                           size_t len);

// Writes the canonical scenario text to `*out`; free it with [`uwb_string_free`].
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum UwbStatus uwb_scenario_emit(const struct UwbScenario *scenario, char **out);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void uwb_string_free(char *s);

// Runs the full sweep. `workers = 0` uses the default thread pool; the
// result does not depend on the worker count.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum UwbStatus uwb_sweep(const struct UwbScenario *scenario,
                         size_t workers,
                         struct UwbMetrics **out);

// Runs a single seeded trial at one `(M, mode, SNR)` point.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum UwbStatus uwb_run_trial(const struct UwbScenario *scenario,
                             uint32_t m,
                             enum UwbMode mode,
                             double snr_db,
                             uint64_t trial_index,
                             struct UwbTrialResult *out);

// Number of rows; 0 for a null handle.
//
// # Safety
// `metrics` must be null or a live handle.
size_t uwb_metrics_len(const struct UwbMetrics *metrics);

// # Safety
// `metrics` must be a live handle and `out` a valid pointer.
enum UwbStatus uwb_metrics_row(const struct UwbMetrics *metrics,
                               size_t index,
                               struct UwbMetricsRow *out);

// Writes the table as `metrics.csv`-format text to `path`.
//
// # Safety
// `metrics` must be a live handle and `path` a NUL-terminated string.
enum UwbStatus uwb_metrics_write_csv(const struct UwbMetrics *metrics, const char *path);

// # Safety
// `metrics` must be null or a handle from this library not yet freed.
void uwb_metrics_free(struct UwbMetrics *metrics);

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next library call on the same thread.
const char *uwb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *uwb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UWBSYNC_H */
