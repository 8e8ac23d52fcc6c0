#ifndef DPP_FFI_H
#define DPP_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DppStatus {
  DPP_STATUS_OK = 0,
  DPP_STATUS_NULL_POINTER = 1,
  DPP_STATUS_INVALID_UTF8 = 2,
  DPP_STATUS_INVALID_SPEC = 3,
  DPP_STATUS_OUT_OF_RANGE = 4,
  DPP_STATUS_UNSUPPORTED = 5,
  DPP_STATUS_NUMERICAL = 6,
  DPP_STATUS_BUFFER_TOO_SMALL = 7,
  DPP_STATUS_PANIC = 8,
} DppStatus;

/**
 * Kernel of one ensemble.
 */
typedef struct DppKernelModel DppKernelModel;

/**
 * Large-size squared-radius law of one ensemble.
 */
typedef struct DppLimitLaw DppLimitLaw;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *dpp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dpp_version(void);

/**
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DppStatus dpp_kernel_model_new(const char *spec_json, struct DppKernelModel **out);

/**
 * # Safety
 * `model` must come from [`dpp_kernel_model_new`] and not be used after
 * this call. NULL is ignored.
 */
void dpp_kernel_model_free(struct DppKernelModel *model);

/**
 * `K(x, y)` written to `out_re`, `out_im`.
 *
 * # Safety
 * `model` must be a live handle; output pointers must be writable.
 */
enum DppStatus dpp_kernel(const struct DppKernelModel *model,
                          double x_re,
                          double x_im,
                          double y_re,
                          double y_im,
                          double *out_re,
                          double *out_im);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum DppStatus dpp_one_point_density(const struct DppKernelModel *model,
                                     double z_re,
                                     double z_im,
                                     double *out);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum DppStatus dpp_two_point_density(const struct DppKernelModel *model,
                                     double x_re,
                                     double x_im,
                                     double y_re,
                                     double y_im,
                                     double *out);

/**
 * `m_a / m_0` in closed form.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum DppStatus dpp_moment_ratio(const char *spec_json, size_t a, double *out);

/**
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum DppStatus dpp_limit_law_new(const char *spec_json, struct DppLimitLaw **out);

/**
 * # Safety
 * `law` must come from [`dpp_limit_law_new`] and not be used after this
 * call. NULL is ignored.
 */
void dpp_limit_law_free(struct DppLimitLaw *law);

/**
 * `φ(u)` for `u ∈ [0, 1)`.
 *
 * # Safety
 * `law` must be a live handle; `out` must be writable.
 */
enum DppStatus dpp_limit_phi(const struct DppLimitLaw *law, double u, double *out);

/**
 * Limiting CDF of `|z|²`.
 *
 * # Safety
 * `law` must be a live handle; `out` must be writable.
 */
enum DppStatus dpp_limit_cdf(const struct DppLimitLaw *law, double t, double *out);

/**
 * Exact finite-size CDF of `|z|²`; `scaled` is 0 or 1.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum DppStatus dpp_finite_n_cdf(const char *spec_json, double t, bool scaled, double *out);

/**
 * Eigenvalues of one draw from stream `(seed, index)`. Writes up to
 * `capacity` values into `re` and `im` and the point count into `count`;
 * returns `BufferTooSmall` (with `count` set) when `capacity` is too small.
 *
 * # Safety
 * `re` and `im` must each hold `capacity` doubles; `count` must be writable.
 */
enum DppStatus dpp_sample_eigenvalues(const char *spec_json,
                                      bool scaled,
                                      uint64_t seed,
                                      uint64_t index,
                                      double *re,
                                      double *im,
                                      size_t capacity,
                                      size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPP_FFI_H */
