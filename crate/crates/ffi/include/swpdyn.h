#ifndef SWPDYN_H
#define SWPDYN_H

/* Generated by cbindgen from swpdyn-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible entry points.
 */
typedef enum SwpStatus {
  SWP_STATUS_OK = 0,
  SWP_STATUS_INVALID_ARGUMENT = 1,
  SWP_STATUS_NUMERICAL_FAILURE = 2,
  SWP_STATUS_CONFIG_ERROR = 3,
  SWP_STATUS_IO_ERROR = 4,
  SWP_STATUS_PANIC = 5,
} SwpStatus;

/**
 * Expectation-series handle from an ensemble run.
 */
typedef struct SwpExpectations SwpExpectations;

/**
 * Model handle: hbar, mass, packet index, and potential.
 */
typedef struct SwpModel SwpModel;

/**
 * Trajectory handle: rows of `(t, flat state, energy)`.
 */
typedef struct SwpTrajectory SwpTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message into `buf` (NUL-terminated, truncated
 * to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes (or be null to query the length).
 */
uintptr_t swp_last_error_message(char *buf, uintptr_t len);

/**
 * Build a model.
 *
 * `n_entries` holds the `dim` multi-index entries. The potential is the sum
 * of `n_terms` monomials: term `k` has coefficient `coeffs[k]` and exponents
 * `exponents[k * dim .. (k + 1) * dim]`.
 *
 * # Safety
 * `n_entries` must point to `dim` readable `u32`, `coeffs` to `n_terms`
 * readable `f64`, and `exponents` to `n_terms * dim` readable `u32`.
 */
struct SwpModel *swp_model_new(double hbar,
                               double mass,
                               uintptr_t dim,
                               const uint32_t *n_entries,
                               uintptr_t n_terms,
                               const double *coeffs,
                               const uint32_t *exponents);

/**
 * Release a model handle.
 *
 * # Safety
 * `model` must come from [`swp_model_new`] and not have been freed.
 */
void swp_model_free(struct SwpModel *model);

/**
 * Integrate the classical system with Störmer-Verlet.
 *
 * # Safety
 * `model` must be a live model handle; `q0` and `p0` must point to `dim`
 * readable doubles.
 */
struct SwpTrajectory *swp_classical_run(const struct SwpModel *model,
                                        const double *q0,
                                        const double *p0,
                                        double dt,
                                        double t_final);

/**
 * Integrate the reduced packet system with the variational splitting
 * (`use_rk4 != 0` selects the RK4 reference integrator instead).
 *
 * # Safety
 * `model` must be a live model handle; `q0`, `p0` must point to `dim`
 * doubles and `a0`, `b0` to row-major `dim * dim` doubles.
 */
struct SwpTrajectory *swp_reduced_run(const struct SwpModel *model,
                                      const double *q0,
                                      const double *p0,
                                      const double *a0,
                                      const double *b0,
                                      double dt,
                                      double t_final,
                                      int32_t use_rk4);

/**
 * Number of recorded rows.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
uintptr_t swp_trajectory_len(const struct SwpTrajectory *traj);

/**
 * Length of one flat state row.
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
uintptr_t swp_trajectory_state_len(const struct SwpTrajectory *traj);

/**
 * Time of row `i` (NaN when out of range).
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double swp_trajectory_time(const struct SwpTrajectory *traj, uintptr_t i);

/**
 * Energy recorded at row `i` (NaN when out of range).
 *
 * # Safety
 * `traj` must be a live trajectory handle.
 */
double swp_trajectory_energy(const struct SwpTrajectory *traj, uintptr_t i);

/**
 * Copy the flat state of row `i` into `out`.
 *
 * # Safety
 * `traj` must be a live trajectory handle and `out` must point to
 * `swp_trajectory_state_len` writable doubles.
 */
enum SwpStatus swp_trajectory_state(const struct SwpTrajectory *traj, uintptr_t i, double *out);

/**
 * Release a trajectory handle.
 *
 * # Safety
 * `traj` must come from a `swp_*_run` call and not have been freed.
 */
void swp_trajectory_free(struct SwpTrajectory *traj);

/**
 * Sample the packet's phase-space density and propagate the ensemble,
 * recording self-normalized expectation values. The packet norm is fixed by
 * solving for the appropriate `delta` internally.
 *
 * # Safety
 * `model` must be a live model handle; `q0`, `p0` must point to `dim`
 * doubles and `a0`, `b0` to row-major `dim * dim` doubles.
 */
struct SwpExpectations *swp_egorov_run(const struct SwpModel *model,
                                       const double *q0,
                                       const double *p0,
                                       const double *a0,
                                       const double *b0,
                                       uintptr_t samples,
                                       uint64_t seed,
                                       double dt,
                                       double t_final);

/**
 * Number of recorded times.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
uintptr_t swp_expectations_len(const struct SwpExpectations *e);

/**
 * Time of record `i`.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
double swp_expectations_time(const struct SwpExpectations *e, uintptr_t i);

/**
 * Mean position component `axis` at record `i`.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
double swp_expectations_mean_x(const struct SwpExpectations *e, uintptr_t i, uintptr_t axis);

/**
 * Mean momentum component `axis` at record `i`.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
double swp_expectations_mean_p(const struct SwpExpectations *e, uintptr_t i, uintptr_t axis);

/**
 * Mean classical energy at record `i`.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
double swp_expectations_mean_energy(const struct SwpExpectations *e, uintptr_t i);

/**
 * Effective sample size at record `i`.
 *
 * # Safety
 * `e` must be a live expectations handle.
 */
double swp_expectations_ess(const struct SwpExpectations *e, uintptr_t i);

/**
 * Release an expectations handle.
 *
 * # Safety
 * `e` must come from [`swp_egorov_run`] and not have been freed.
 */
void swp_expectations_free(struct SwpExpectations *e);

/**
 * Parse a configuration file (same flat key = value format as the CLI) and
 * return the model it describes.
 *
 * # Safety
 * `text` must be a NUL-terminated UTF-8 string.
 */
struct SwpModel *swp_model_from_config(const char *text);

/**
 * Status code of the most recent failure recorded by this thread.
 */
enum SwpStatus swp_last_error_status(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWPDYN_H */
