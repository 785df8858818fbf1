#ifndef BEMSIM_H
#define BEMSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BemsimStatus {
  BEMSIM_STATUS_OK = 0,
  BEMSIM_STATUS_NULL_POINTER = 1,
  BEMSIM_STATUS_INVALID_ARGUMENT = 2,
  BEMSIM_STATUS_CONFIG = 3,
  BEMSIM_STATUS_IO = 4,
  BEMSIM_STATUS_NUMERIC = 5,
  BEMSIM_STATUS_PANIC = 6,
} BemsimStatus;

typedef enum BemsimSystem {
  BEMSIM_SYSTEM_OFDM = 0,
  BEMSIM_SYSTEM_GFDM = 1,
} BemsimSystem;

typedef enum BemsimBasis {
  BEMSIM_BASIS_CE = 0,
  BEMSIM_BASIS_LP = 1,
} BemsimBasis;

/**
 * Estimator kinds; `Perfect` only appears in BER report cells.
 */
typedef enum BemsimCurve {
  BEMSIM_CURVE_LS = 0,
  BEMSIM_CURVE_LMMSE = 1,
  BEMSIM_CURVE_LS_BEM = 2,
  BEMSIM_CURVE_LMMSE_BEM = 3,
  BEMSIM_CURVE_ALMMSE_BEM = 4,
  BEMSIM_CURVE_PERFECT = 5,
} BemsimCurve;

typedef enum BemsimFormat {
  BEMSIM_FORMAT_CSV = 0,
  BEMSIM_FORMAT_JSON = 1,
} BemsimFormat;

/**
 * Simulation configuration.
 */
typedef struct BemsimConfig BemsimConfig;

/**
 * Estimator prepared for one configuration and Eb/N0.
 */
typedef struct BemsimEstimator BemsimEstimator;

/**
 * Completed sweep.
 */
typedef struct BemsimReport BemsimReport;

/**
 * One report cell. Metrics that were not measured are NaN.
 */
typedef struct BemsimCell {
  enum BemsimCurve curve;
  double ebn0_db;
  double mse_db;
  double mse_full_db;
  double ber;
  uint64_t bit_errors;
  uint64_t bits;
  uint64_t trials;
  double ci_halfwidth;
} BemsimCell;

typedef struct BemsimComplex {
  double re;
  double im;
} BemsimComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len - 1` bytes) and returns the full message
 * length in bytes. Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bemsim_last_error_message(char *buf, size_t len);

/**
 * Creates a configuration holding the reference defaults.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum BemsimStatus bemsim_config_new(struct BemsimConfig **out);

/**
 * Parses a JSON configuration; missing fields take their defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum BemsimStatus bemsim_config_from_json(const char *json, struct BemsimConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library, not yet freed.
 */
void bemsim_config_free(struct BemsimConfig *config);

/**
 * Sets the system and frame geometry.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum BemsimStatus bemsim_config_set_frame(struct BemsimConfig *config,
                                          enum BemsimSystem system,
                                          size_t k,
                                          size_t m,
                                          size_t pilot_spacing,
                                          size_t cp_len,
                                          double alpha);

/**
 * Sets the BEM basis and order.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum BemsimStatus bemsim_config_set_basis(struct BemsimConfig *config,
                                          enum BemsimBasis basis,
                                          size_t n_a);

/**
 * Replaces the estimator list.
 *
 * # Safety
 * `config` must be a live handle and `kinds` valid for `len` reads.
 */
enum BemsimStatus bemsim_config_set_estimators(struct BemsimConfig *config,
                                               const enum BemsimCurve *kinds,
                                               size_t len);

/**
 * Replaces the Eb/N0 grid (dB).
 *
 * # Safety
 * `config` must be a live handle and `grid` valid for `len` reads.
 */
enum BemsimStatus bemsim_config_set_ebn0_grid(struct BemsimConfig *config,
                                              const double *grid,
                                              size_t len);

/**
 * Sets the trial budget, master seed and worker count (0 = all cores).
 *
 * # Safety
 * `config` must be a live handle.
 */
enum BemsimStatus bemsim_config_set_run(struct BemsimConfig *config,
                                        uint64_t trials,
                                        uint64_t min_trials,
                                        uint64_t master_seed,
                                        size_t threads);

/**
 * Checks the configuration without running anything.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum BemsimStatus bemsim_config_validate(const struct BemsimConfig *config);

/**
 * Runs an MSE sweep.
 *
 * # Safety
 * `config` must be a live handle and `out` valid for writes.
 */
enum BemsimStatus bemsim_run_mse(const struct BemsimConfig *config, struct BemsimReport **out);

/**
 * Runs a BER sweep, which adds a perfect-CSI curve.
 *
 * # Safety
 * `config` must be a live handle and `out` valid for writes.
 */
enum BemsimStatus bemsim_run_ber(const struct BemsimConfig *config, struct BemsimReport **out);

/**
 * # Safety
 * `report` must be null or a handle from this library, not yet freed.
 */
void bemsim_report_free(struct BemsimReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum BemsimStatus bemsim_report_cell_count(const struct BemsimReport *report, size_t *out);

/**
 * Reads cell `index`, ordered by curve and then Eb/N0.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum BemsimStatus bemsim_report_cell(const struct BemsimReport *report,
                                     size_t index,
                                     struct BemsimCell *out);

/**
 * Writes the report as CSV or JSON.
 *
 * # Safety
 * `report` must be a live handle and `path` a NUL-terminated string.
 */
enum BemsimStatus bemsim_report_write(const struct BemsimReport *report,
                                      const char *path,
                                      enum BemsimFormat format);

/**
 * Prepares one estimator for `config`'s frame, channel profile and basis at
 * `ebn0_db`.
 *
 * # Safety
 * `config` must be a live handle and `out` valid for writes.
 */
enum BemsimStatus bemsim_estimator_new(const struct BemsimConfig *config,
                                       enum BemsimCurve kind,
                                       double ebn0_db,
                                       struct BemsimEstimator **out);

/**
 * # Safety
 * `estimator` must be null or a handle from this library, not yet freed.
 */
void bemsim_estimator_free(struct BemsimEstimator *estimator);

/**
 * Number of pilots and full-grid bins the estimator works on.
 *
 * # Safety
 * `estimator` must be a live handle; outputs must be valid for writes.
 */
enum BemsimStatus bemsim_estimator_dims(const struct BemsimEstimator *estimator,
                                        size_t *n_pilots,
                                        size_t *grid_size);

/**
 * Estimates the full-grid channel response from received pilots `y` and
 * transmitted unit-modulus pilots `x` (both `n_pilots` long, gain removed).
 *
 * # Safety
 * `estimator` must be a live handle, `y` and `x` valid for `n_pilots`
 * reads and `h_full` valid for `grid_size` writes.
 */
enum BemsimStatus bemsim_estimator_run(const struct BemsimEstimator *estimator,
                                       const struct BemsimComplex *y,
                                       const struct BemsimComplex *x,
                                       size_t n_pilots,
                                       struct BemsimComplex *h_full,
                                       size_t grid_size);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEMSIM_H */
