#ifndef SHG_FFI_H
#define SHG_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ShgStatus {
  ShgStatus_Ok = 0,
  ShgStatus_Domain = 1,
  ShgStatus_Numerical = 2,
  ShgStatus_NullPointer = 3,
  ShgStatus_Panic = 4,
} ShgStatus;

/**
 * Opaque model handle: parameters, TBA solution and the lazily computed
 * support and density.
 */
typedef struct ShgModel ShgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a model and solve its TBA equation with the default grid.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum ShgStatus shg_model_new(double r,
                             double b,
                             double alpha,
                             uint64_t n,
                             double eta,
                             struct ShgModel **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`shg_model_new`] not yet freed.
 */
void shg_model_free(struct ShgModel *model);

/**
 * Support endpoints a_N < 0 < b_N.
 *
 * # Safety
 * `model` must be a live handle; `a` and `b` writable.
 */
enum ShgStatus shg_model_endpoints(struct ShgModel *model, double *a, double *b);

/**
 * Large-N constants c0, d0 and d1.
 *
 * # Safety
 * `model` must be a live handle; the outputs writable.
 */
enum ShgStatus shg_model_constants(const struct ShgModel *model,
                                   double *c0,
                                   double *d0,
                                   double *d1);

/**
 * Density samples. Writes at most `cap` pairs into `xi` and `rho` and the
 * full sample count into `len`; call with `cap = 0` to query the size.
 *
 * # Safety
 * `model` must be a live handle, `len` writable, and `xi`, `rho` valid for
 * `cap` elements when `cap > 0`.
 */
enum ShgStatus shg_model_density(struct ShgModel *model,
                                 double *xi,
                                 double *rho,
                                 size_t cap,
                                 size_t *len);

/**
 * First moment of the equilibrium density.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum ShgStatus shg_model_first_moment(struct ShgModel *model, double *out);

/**
 * Copy the calling thread's last error message, NUL-terminated and
 * truncated to `cap` bytes. Returns the untruncated length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t shg_last_error(char *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHG_FFI_H */
