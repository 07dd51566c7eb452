#ifndef KDV_ELLIPTIC_H
#define KDV_ELLIPTIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum KdvStatus {
  KDV_STATUS_OK = 0,
  KDV_STATUS_NULL_POINTER = 1,
  KDV_STATUS_INVALID_ARGUMENT = 2,
  KDV_STATUS_DEGENERATE_DELTAS = 3,
  KDV_STATUS_POLE_PROXIMITY = 4,
  KDV_STATUS_NON_POSITIVE_DISCRIMINANT = 5,
  KDV_STATUS_CONVERGENCE_FAILURE = 6,
  KDV_STATUS_PRECISION_LOSS = 7,
  KDV_STATUS_NUMERIC = 8,
  KDV_STATUS_PANIC = 9,
} KdvStatus;

/**
 * Opaque N-soliton solution.
 */
typedef struct KdvSolution KdvSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static text for a status code.
 */
const char *kdv_status_message(enum KdvStatus status);

/**
 * ℘(x; g2, g3).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KdvStatus kdv_wp(double g2, double g3, double x, double *out);

/**
 * ζ(x; g2, g3).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KdvStatus kdv_zeta(double g2, double g3, double x, double *out);

/**
 * sn(x | k²) for k² in [0, 1].
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KdvStatus kdv_sn(double k2, double x, double *out);

/**
 * Roots of 4t³ − g2·t − g3; real and imaginary parts in three-element
 * arrays, ordered e1, e2, e3.
 *
 * # Safety
 * `re` and `im` must each be valid for three writes.
 */
enum KdvStatus kdv_roots(double g2, double g3, double *re, double *im);

/**
 * Builds the N-soliton for `n` shifts. `deltas` may be null when `n` is 0.
 * On success `*out` owns a handle for [`kdv_solution_free`].
 *
 * # Safety
 * `deltas` must be valid for `n` reads and `out` for one write.
 */
enum KdvStatus kdv_solution_new(double g2,
                                double g3,
                                const double *deltas,
                                size_t n,
                                struct KdvSolution **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sol` must come from [`kdv_solution_new`] and not be used afterwards.
 */
void kdv_solution_free(struct KdvSolution *sol);

/**
 * Number of shifts in the solution; 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t kdv_solution_len(const struct KdvSolution *sol);

/**
 * z and u = z_x at x. Either out pointer may be null.
 *
 * # Safety
 * `sol` must be a live handle; non-null outs must be valid for writes.
 */
enum KdvStatus kdv_solution_eval(const struct KdvSolution *sol, double x, double *z, double *u);

/**
 * The travelling solution u(x + bt) − b/6 of the full equation at (x, t).
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
enum KdvStatus kdv_solution_eval_time(const struct KdvSolution *sol,
                                      double b,
                                      double x,
                                      double t,
                                      double *out);

/**
 * Largest scaled static residual on `n_points` samples of [x_min, x_max],
 * skipping points within `mask_radius` of a pole.
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
enum KdvStatus kdv_solution_static_residual(const struct KdvSolution *sol,
                                            double x_min,
                                            double x_max,
                                            size_t n_points,
                                            double mask_radius,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KDV_ELLIPTIC_H */
