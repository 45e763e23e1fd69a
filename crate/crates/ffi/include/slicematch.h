#ifndef SLICEMATCH_H
#define SLICEMATCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_ARGUMENT = 2,
  SM_STATUS_DIMENSION_MISMATCH = 3,
  SM_STATUS_INVALID_MEASURE = 4,
  SM_STATUS_NOT_ORTHOGONAL = 5,
  SM_STATUS_UNSUPPORTED = 6,
  SM_STATUS_DEGENERATE = 7,
  SM_STATUS_BUFFER_TOO_SMALL = 8,
  SM_STATUS_INTERNAL = 9,
} SmStatus;

typedef enum SmDistance {
  SM_DISTANCE_W2 = 0,
  SM_DISTANCE_SW2 = 1,
} SmDistance;

/**
 * Opaque discrete probability measure.
 */
typedef struct SmMeasure SmMeasure;

/**
 * Opaque n×n orthogonal matrix.
 */
typedef struct SmOrtho SmOrtho;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null.
 *
 * The string stays valid until the next failing call on the same thread.
 */
const char *sm_last_error_message(void);

/**
 * Builds a measure from `len` atoms of dimension `dim` (row-major `points`).
 *
 * `weights` may be null for uniform weights.
 *
 * # Safety
 * `points` must hold `len * dim` values and `weights`, if non-null, `len` values.
 */
enum SmStatus sm_measure_new(size_t dim,
                             size_t len,
                             const double *points,
                             const double *weights,
                             struct SmMeasure **out);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards; null is ignored.
 */
void sm_measure_free(struct SmMeasure *m);

/**
 * Number of atoms, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t sm_measure_len(const struct SmMeasure *m);

/**
 * Dimension, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t sm_measure_dim(const struct SmMeasure *m);

/**
 * Copies the row-major coordinates (`len * dim` values) into `out`.
 *
 * # Safety
 * `out` must be writable for `capacity` values.
 */
enum SmStatus sm_measure_points(const struct SmMeasure *m, double *out, size_t capacity);

/**
 * # Safety
 * `out` must be writable for `capacity` values.
 */
enum SmStatus sm_measure_weights(const struct SmMeasure *m, double *out, size_t capacity);

/**
 * Mean (`dim` values) and second moment.
 *
 * # Safety
 * `mean_out` must be writable for `dim` values and `m2_out` for one.
 */
enum SmStatus sm_measure_moments(const struct SmMeasure *m, double *mean_out, double *m2_out);

/**
 * Haar-random n×n orthogonal matrix, the same one `slicematch make-ortho` prints for this seed.
 *
 * # Safety
 * `out` must be writable.
 */
enum SmStatus sm_ortho_haar(size_t n, uint64_t seed, struct SmOrtho **out);

/**
 * Validated orthogonal matrix from `n * n` row-major values.
 *
 * # Safety
 * `rows` must hold `n * n` values and `out` must be writable.
 */
enum SmStatus sm_ortho_from_rows(size_t n, const double *rows, struct SmOrtho **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards; null is ignored.
 */
void sm_ortho_free(struct SmOrtho *p);

/**
 * # Safety
 * `p` must be null or a live handle.
 */
size_t sm_ortho_dim(const struct SmOrtho *p);

/**
 * Copies the matrix row-major (`n * n` values) into `out`.
 *
 * # Safety
 * `out` must be writable for `capacity` values.
 */
enum SmStatus sm_ortho_rows(const struct SmOrtho *p, double *out, size_t capacity);

/**
 * `U(σ, μ, P)`, returned as a new measure handle.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SmStatus sm_apply_operator(const struct SmMeasure *sigma,
                                const struct SmMeasure *mu,
                                const struct SmOrtho *p,
                                struct SmMeasure **out);

/**
 * `Σᵢ W₂²(σ^{θᵢ}, μ^{θᵢ})` over the columns of P.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SmStatus sm_sliced_residual(const struct SmMeasure *sigma,
                                 const struct SmMeasure *mu,
                                 const struct SmOrtho *p,
                                 double *out);

/**
 * Exact `W₂` between equal-size uniform clouds.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum SmStatus sm_w2_exact(const struct SmMeasure *a, const struct SmMeasure *b, double *out);

/**
 * Monte-Carlo `SW₂` and its standard error; `std_error_out` may be null.
 *
 * # Safety
 * Handles must be live and `value_out` writable.
 */
enum SmStatus sm_sw2(const struct SmMeasure *a,
                     const struct SmMeasure *b,
                     size_t num_directions,
                     uint64_t seed,
                     double *value_out,
                     double *std_error_out);

/**
 * Closed-form `S(x) = a x + b` registering σ onto η.
 *
 * `num_directions` and `seed` are read only for [`SmDistance::Sw2`].
 * `degenerate_out` may be null; it is set when the scale is not positive.
 *
 * # Safety
 * Handles must be live, `a_out` writable and `b_out` writable for `dim` values.
 */
enum SmStatus sm_register_scale_shift(const struct SmMeasure *sigma,
                                      const struct SmMeasure *eta,
                                      enum SmDistance distance,
                                      size_t num_directions,
                                      uint64_t seed,
                                      double *a_out,
                                      double *b_out,
                                      bool *degenerate_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLICEMATCH_H */
