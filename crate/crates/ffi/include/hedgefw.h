/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef HEDGEFW_H
#define HEDGEFW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum {
  HFW_STATUS_OK = 0,
  HFW_STATUS_NULL_POINTER = 1,
  HFW_STATUS_INVALID_ARGUMENT = 2,
  HFW_STATUS_DIMENSION_MISMATCH = 3,
  HFW_STATUS_NON_FINITE = 4,
  HFW_STATUS_DEGENERATE_DESIGN = 5,
  HFW_STATUS_NUMERICAL = 6,
  HFW_STATUS_IO = 7,
  HFW_STATUS_PANIC = 8,
} HfwStatus;

/**
 * Design family for [`hfw_instance_generate`].
 */
typedef enum {
  HFW_DESIGN_GAUSSIAN_IID = 0,
  HFW_DESIGN_TOEPLITZ_CORRELATED = 1,
} HfwDesign;

/**
 * Output of cross-validated LASSO.
 */
typedef struct HfwCvResult HfwCvResult;

/**
 * Output of a Hedge-FW run.
 */
typedef struct HfwHedgeResult HfwHedgeResult;

/**
 * A regression instance, optionally with the ground truth it was drawn from.
 */
typedef struct HfwInstance HfwInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hfw_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into the library on this
 * thread.
 */
const char *hfw_last_error_message(void);

/**
 * Copies a row-major `n x p` design and a length-`n` response into a new
 * instance.
 *
 * # Safety
 * `x` must point to `n * p` doubles, `y` to `n`, `out` to writable storage.
 */
HfwStatus hfw_instance_new(const double *x, const double *y, size_t n, size_t p, HfwInstance **out);

/**
 * Draws a synthetic instance. `rho` is ignored for the i.i.d. design.
 *
 * # Safety
 * `out` must point to writable storage.
 */
HfwStatus hfw_instance_generate(size_t n,
                                size_t p,
                                size_t s0,
                                double sigma,
                                HfwDesign design,
                                double rho,
                                uint64_t seed,
                                HfwInstance **out);

/**
 * Number of observations; 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t hfw_instance_n(const HfwInstance *inst);

/**
 * Number of features; 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t hfw_instance_p(const HfwInstance *inst);

/**
 * Copies the response into `out` (length `n`).
 *
 * # Safety
 * `inst` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_instance_y(const HfwInstance *inst, double *out, size_t len);

/**
 * Copies the generating coefficient vector into `out` (length `p`). Fails
 * with `INVALID_ARGUMENT` for instances built from caller data.
 *
 * # Safety
 * `inst` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_instance_true_beta(const HfwInstance *inst, double *out, size_t len);

/**
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void hfw_instance_free(HfwInstance *inst);

/**
 * Writes the default geometric radius grid of `size` points into `out`.
 *
 * # Safety
 * `inst` must be a live handle and `out` must hold `size` doubles.
 */
HfwStatus hfw_default_grid(const HfwInstance *inst, size_t size, double *out);

/**
 * Runs Hedge over stochastic Frank-Wolfe experts, one per radius. A
 * non-positive `eta` selects `sqrt(8 ln G / n)`; `dirac_tolerance` is
 * checked but only used later by [`hfw_result_select`].
 *
 * # Safety
 * `inst` must be a live handle, `radii` must hold `num_radii` doubles and
 * `out` must point to writable storage.
 */
HfwStatus hfw_run(const HfwInstance *inst,
                  const double *radii,
                  size_t num_radii,
                  double eta,
                  double k_step,
                  HfwHedgeResult **out);

/**
 * Number of experts; 0 for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
size_t hfw_result_num_experts(const HfwHedgeResult *res);

/**
 * Learning rate actually used; NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double hfw_result_eta(const HfwHedgeResult *res);

/**
 * Final weights (length G).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_result_weights(const HfwHedgeResult *res, double *out, size_t len);

/**
 * Natural logs of the final weights (length G).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_result_log_weights(const HfwHedgeResult *res, double *out, size_t len);

/**
 * Cumulative prequential loss per expert (length G).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_result_cumulative_loss(const HfwHedgeResult *res, double *out, size_t len);

/**
 * Final iterate of expert `expert` (length p).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_result_iterate(const HfwHedgeResult *res, size_t expert, double *out, size_t len);

/**
 * Weight-averaged iterate (length p).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_result_aggregate(const HfwHedgeResult *res, double *out, size_t len);

/**
 * Iterate of the highest-weight expert (length p). `out_expert` and
 * `out_is_dirac` may be null.
 *
 * # Safety
 * `res` must be a live handle, `out` must hold `len` doubles, and the
 * optional pointers must be null or writable.
 */
HfwStatus hfw_result_select(const HfwHedgeResult *res,
                            double dirac_tolerance,
                            double *out,
                            size_t len,
                            size_t *out_expert,
                            bool *out_is_dirac);

/**
 * # Safety
 * `res` must be null or a handle not yet freed.
 */
void hfw_result_free(HfwHedgeResult *res);

/**
 * k-fold cross-validated LASSO over the default geometric lambda path of
 * `path_size` points.
 *
 * # Safety
 * `inst` must be a live handle and `out` must point to writable storage.
 */
HfwStatus hfw_cv_lasso(const HfwInstance *inst,
                       size_t path_size,
                       size_t folds,
                       uint64_t seed,
                       HfwCvResult **out);

/**
 * Selected penalty; NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double hfw_cv_best_lambda(const HfwCvResult *res);

/**
 * Refit coefficients at the selected penalty (length p).
 *
 * # Safety
 * `res` must be a live handle and `out` must hold `len` doubles.
 */
HfwStatus hfw_cv_beta(const HfwCvResult *res, double *out, size_t len);

/**
 * # Safety
 * `res` must be null or a handle not yet freed.
 */
void hfw_cv_free(HfwCvResult *res);

/**
 * `||X (b - beta)||_2 / sqrt(n)` against the instance's ground truth.
 *
 * # Safety
 * `inst` must be a live handle, `beta` must hold `len` doubles and `out`
 * must be writable.
 */
HfwStatus hfw_prediction_error(const HfwInstance *inst,
                               const double *beta,
                               size_t len,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEDGEFW_H */
