#ifndef ORTHOGLASS_H
#define ORTHOGLASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum OgStatus {
  OG_STATUS_OK = 0,
  OG_STATUS_NULL_POINTER = 1,
  OG_STATUS_DOMAIN = 2,
  OG_STATUS_NO_CONVERGENCE = 3,
  OG_STATUS_DIMENSION = 4,
  OG_STATUS_CAP_EXCEEDED = 5,
  OG_STATUS_INVALID_ARGUMENT = 6,
  OG_STATUS_NO_TRANSITION = 7,
  OG_STATUS_PANIC = 8,
} OgStatus;

/*
 A spectral measure with its transform evaluators.
 */
typedef struct OgProfile OgProfile;

/*
 The rate function `T_μ` of a profile.
 */
typedef struct OgRateFunction OgRateFunction;

/*
 A two-replica stationary point. `hessian` is row-major; `classification`
 is 0 local max, 1 saddle, 2 indefinite.
 */
typedef struct OgSolution {
  double x_star;
  double y_star;
  double psi;
  double hessian[4];
  int32_t classification;
  size_t iterations;
  bool converged;
} OgSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread; empty if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *og_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *og_version(void);

/*
 # Safety
 `out` must be valid for a pointer write.
 */
enum OgStatus og_profile_new_semicircle(struct OgProfile **out);

/*
 # Safety
 `out` must be valid for a pointer write.
 */
enum OgStatus og_profile_new_two_point(double p, struct OgProfile **out);

/*
 # Safety
 `out` must be valid for a pointer write.
 */
enum OgStatus og_profile_new_marchenko_pastur(double lambda, struct OgProfile **out);

/*
 Discrete measure with atoms `values[i]` of mass `weights[i]`.

 # Safety
 `values` and `weights` must point to `len` readable doubles; `out` must be
 valid for a pointer write.
 */
enum OgStatus og_profile_new_discrete(const double *values,
                                      const double *weights,
                                      size_t len,
                                      struct OgProfile **out);

/*
 Limiting-measure profile of a model given as JSON, e.g. `{"kind":"rom","p":0.5}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be valid for a pointer write.
 */
enum OgStatus og_profile_from_model_json(const char *json, struct OgProfile **out);

/*
 # Safety
 `profile` must come from an `og_profile_new_*` call and not be freed twice.
 */
void og_profile_free(struct OgProfile *profile);

/*
 # Safety
 `profile` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_profile_hilbert(const struct OgProfile *profile, double z, double *out);

/*
 # Safety
 `profile` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_profile_r_transform(const struct OgProfile *profile, double z, double *out);

/*
 # Safety
 `profile` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_profile_q_transform(const struct OgProfile *profile, double x, double *out);

/*
 `I_μ(β)`.

 # Safety
 `profile` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_profile_free_energy_limit(const struct OgProfile *profile,
                                           double beta,
                                           double *out);

/*
 Rate function of a profile; the profile handle may be freed afterwards.

 # Safety
 `profile` must be a live handle; `out` must be valid for a pointer write.
 */
enum OgStatus og_rate_function_new(const struct OgProfile *profile, struct OgRateFunction **out);

/*
 # Safety
 `rf` must come from `og_rate_function_new` and not be freed twice.
 */
void og_rate_function_free(struct OgRateFunction *rf);

/*
 `T_μ(x)`; `+∞` outside the support.

 # Safety
 `rf` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_rate_function_value(const struct OgRateFunction *rf, double x, double *out);

/*
 `ψ(x, y)`; `-∞` outside the support square.

 # Safety
 `rf` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_psi(const struct OgRateFunction *rf, double beta, double x, double y, double *out);

/*
 # Safety
 `rf` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_solve_fixed_point(const struct OgRateFunction *rf,
                                   double beta,
                                   struct OgSolution *out);

/*
 # Safety
 `rf` must be a live handle; `out` must be valid for a write.
 */
enum OgStatus og_maximize_psi(const struct OgRateFunction *rf, double beta, struct OgSolution *out);

/*
 `Φ_N` by exhaustive enumeration for `J = O diag(d) Oᵀ`, with `o` the
 `n × n` orthogonal matrix in row-major order. `n ≤ 24`.

 # Safety
 `d` must point to `n` doubles, `o` to `n*n` doubles; `out` must be valid for a write.
 */
enum OgStatus og_exact_log_partition(const double *d,
                                     const double *o,
                                     size_t n,
                                     double beta,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORTHOGLASS_H */
