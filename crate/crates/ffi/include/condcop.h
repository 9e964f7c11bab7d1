#ifndef CONDCOP_H
#define CONDCOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CondcopCalibration {
  /**
   * `theta = b1 + b2 x^2`
   */
  CONDCOP_CALIBRATION_QUADRATIC = 0,
  /**
   * `theta = b1 + b2 x + b3 exp(-b4 x^2)`
   */
  CONDCOP_CALIBRATION_EXP_BUMP = 1,
} CondcopCalibration;

typedef enum CondcopFamily {
  CONDCOP_FAMILY_GAUSSIAN = 0,
  CONDCOP_FAMILY_FRANK = 1,
} CondcopFamily;

typedef enum CondcopStatus {
  CONDCOP_STATUS_OK = 0,
  CONDCOP_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad length, unknown enum value, out-of-range parameter.
   */
  CONDCOP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Probability or correlation outside its domain.
   */
  CONDCOP_STATUS_DOMAIN = 3,
  /**
   * I/O failure or an internal sampler inconsistency.
   */
  CONDCOP_STATUS_RUNTIME = 4,
  CONDCOP_STATUS_BUFFER_TOO_SMALL = 5,
  CONDCOP_STATUS_PANIC = 6,
} CondcopStatus;

/**
 * Posterior draws from one chain.
 */
typedef struct CondcopFit CondcopFit;

/**
 * Sampler and prior settings. Start from [`condcop_options_default`].
 */
typedef struct CondcopOptions {
  size_t iterations;
  size_t burn_in;
  size_t thin;
  uint64_t seed;
  double rw_step;
  /**
   * Dirichlet-process total mass.
   */
  double lambda;
  /**
   * Prior variance of each coefficient.
   */
  double sigma2;
  bool adapt;
  bool occupancy_scaled;
  bool label_swaps;
  size_t warm_start;
} CondcopOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *condcop_version(void);

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *condcop_last_error(void);

/**
 * Gaussian copula density `c(u, v; rho)`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum CondcopStatus condcop_copula_density(double u, double v, double rho, double *out_density);

/**
 * Gaussian copula distribution function `C(u, v; rho)`.
 *
 * # Safety
 * `out_cdf` must be null or point to writable memory for one `double`.
 */
enum CondcopStatus condcop_copula_cdf(double u, double v, double rho, double *out_cdf);

/**
 * Copula density at `(u, v)` given covariate `x` and coefficients `beta`.
 *
 * # Safety
 * `beta` must point to `beta_len` doubles; `out_density` to one writable double.
 */
enum CondcopStatus condcop_conditional_density(double u,
                                               double v,
                                               double x,
                                               uint32_t calibration,
                                               const double *beta,
                                               size_t beta_len,
                                               double *out_density);

/**
 * Kendall's tau of a Gaussian-copula mixture.
 *
 * # Safety
 * `weights` and `rhos` must each point to `k` doubles.
 */
enum CondcopStatus condcop_mixture_tau(const double *weights,
                                       const double *rhos,
                                       size_t k,
                                       double *out_tau);

/**
 * Simulates `n` pseudo-observations into the three output arrays. A null
 * `beta` uses the built-in generating coefficients.
 *
 * # Safety
 * `beta` must be null or point to `beta_len` doubles; each output must hold `n` doubles.
 */
enum CondcopStatus condcop_simulate(uint32_t family,
                                    uint32_t calibration,
                                    const double *beta,
                                    size_t beta_len,
                                    size_t n,
                                    uint64_t seed,
                                    double *out_u,
                                    double *out_v,
                                    double *out_x);

struct CondcopOptions condcop_options_default(void);

/**
 * Runs one chain on pseudo-observations `(u, v)` with covariate `x`. A null
 * `options` uses the defaults. On success `*out_fit` owns a new handle.
 *
 * # Safety
 * `u`, `v`, `x` must each point to `n` doubles; `out_fit` to a writable pointer.
 */
enum CondcopStatus condcop_fit(const double *u,
                               const double *v,
                               const double *x,
                               size_t n,
                               uint32_t calibration,
                               const struct CondcopOptions *options,
                               struct CondcopFit **out_fit);

/**
 * Loads a fit from a trace CSV written by the CLI or [`condcop_fit_write_trace`].
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_fit` a writable pointer.
 */
enum CondcopStatus condcop_fit_load(const char *path, struct CondcopFit **out_fit);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `fit` must come from this library and must not be used afterwards.
 */
void condcop_fit_free(struct CondcopFit *fit);

/**
 * Number of kept iterations.
 *
 * # Safety
 * `fit` must be a live handle; `out_len` writable.
 */
enum CondcopStatus condcop_fit_len(const struct CondcopFit *fit, size_t *out_len);

/**
 * Post burn-in Metropolis acceptance rate.
 *
 * # Safety
 * `fit` must be a live handle; `out_rate` writable.
 */
enum CondcopStatus condcop_fit_acceptance_rate(const struct CondcopFit *fit, double *out_rate);

/**
 * Occupied-component count of each kept iteration. `len` must be at least
 * the trace length.
 *
 * # Safety
 * `fit` must be a live handle; `out_d_star` must hold `len` elements.
 */
enum CondcopStatus condcop_fit_d_star(const struct CondcopFit *fit, size_t *out_d_star, size_t len);

/**
 * Posterior mean and 95% band of Kendall's tau at each of the `m` covariates.
 *
 * # Safety
 * `x` must point to `m` doubles and each output must hold `m` doubles.
 */
enum CondcopStatus condcop_fit_tau_curve(const struct CondcopFit *fit,
                                         const double *x,
                                         size_t m,
                                         double *out_mean,
                                         double *out_lower,
                                         double *out_upper);

/**
 * One posterior-predictive pair per covariate value.
 *
 * # Safety
 * `x` must point to `m` doubles and each output must hold `m` doubles.
 */
enum CondcopStatus condcop_fit_predictive(const struct CondcopFit *fit,
                                          const double *x,
                                          size_t m,
                                          uint64_t seed,
                                          double *out_u,
                                          double *out_v);

/**
 * Writes the trace in the CLI's CSV layout.
 *
 * # Safety
 * `fit` must be a live handle; `path` a NUL-terminated string.
 */
enum CondcopStatus condcop_fit_write_trace(const struct CondcopFit *fit, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONDCOP_H */
