#ifndef CKMEANS_H
#define CKMEANS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum CkStatus {
  CK_STATUS_OK = 0,
  CK_STATUS_NULL_POINTER = 1,
  CK_STATUS_INVALID_ARGUMENT = 2,
  CK_STATUS_DIMENSION = 3,
  CK_STATUS_INDEX = 4,
  CK_STATUS_TOO_LARGE = 5,
  CK_STATUS_IO = 6,
  CK_STATUS_PANIC = 7,
} CkStatus;

/**
 * Cluster sizes plus must-link and cannot-link pairs.
 */
typedef struct CkConstraints CkConstraints;

/**
 * Points of one problem instance.
 */
typedef struct CkData CkData;

/**
 * Outcome of one solve.
 */
typedef struct CkResult CkResult;

/**
 * Solver settings. Obtain defaults from [`ck_config_default`].
 */
typedef struct CkConfig {
  double rho;
  size_t max_iters;
  double cg_tol;
  uint64_t seed;
} CkConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *ck_last_error(void);

/**
 * Static description of a status code.
 */
const char *ck_status_str(enum CkStatus status);

const char *ck_version(void);

struct CkConfig ck_config_default(void);

/**
 * Copies `n` points of dimension `d` stored row by row.
 *
 * # Safety
 * `values` must point to `n * d` readable doubles and `out` to writable
 * storage for one pointer.
 */
enum CkStatus ck_data_new(const double *values, size_t n, size_t d, struct CkData **out);

/**
 * # Safety
 * `data` must be null or a handle from [`ck_data_new`] not yet freed.
 */
void ck_data_free(struct CkData *data);

/**
 * Empty constraint set.
 */
struct CkConstraints *ck_constraints_new(void);

/**
 * # Safety
 * `cs` must be null or a handle from [`ck_constraints_new`] not yet freed.
 */
void ck_constraints_free(struct CkConstraints *cs);

/**
 * Requires cluster `j` to hold exactly `sizes[j]` points.
 *
 * # Safety
 * `cs` must be a live handle and `sizes` must point to `k` readable values.
 */
enum CkStatus ck_constraints_set_sizes(struct CkConstraints *cs, const size_t *sizes, size_t k);

/**
 * # Safety
 * `cs` must be a live handle.
 */
enum CkStatus ck_constraints_add_must_link(struct CkConstraints *cs, size_t a, size_t b);

/**
 * # Safety
 * `cs` must be a live handle.
 */
enum CkStatus ck_constraints_add_cannot_link(struct CkConstraints *cs, size_t a, size_t b);

/**
 * Solves the instance. `constraints` and `config` may be null for none and
 * defaults. A run that stops without converging still returns `CK_STATUS_OK`;
 * check [`ck_result_converged`].
 *
 * # Safety
 * Non-null pointers must be live handles or readable values; `out` must be
 * writable.
 */
enum CkStatus ck_solve(const struct CkData *data,
                       size_t k,
                       const struct CkConstraints *constraints,
                       const struct CkConfig *config,
                       struct CkResult **out);

/**
 * Exhaustive optimum over all `k^n` labellings, refused above `limit`.
 * `*found` is false when no labelling meets the constraints.
 *
 * # Safety
 * `data` must be a live handle, `constraints` null or a live handle, and
 * `objective`, `found` writable.
 */
enum CkStatus ck_oracle(const struct CkData *data,
                        size_t k,
                        const struct CkConstraints *constraints,
                        uint64_t limit,
                        double *objective,
                        bool *found);

/**
 * # Safety
 * `result` must be null or a handle from [`ck_solve`] not yet freed.
 */
void ck_result_free(struct CkResult *result);

/**
 * Number of labels, i.e. points. Zero for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ck_result_len(const struct CkResult *result);

/**
 * Copies the cluster label of every point into `labels`.
 *
 * # Safety
 * `result` must be a live handle and `labels` must have room for `len` values.
 */
enum CkStatus ck_result_labels(const struct CkResult *result, size_t *labels, size_t len);

/**
 * Clustering objective of the labels. NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double ck_result_objective(const struct CkResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
bool ck_result_converged(const struct CkResult *result);

/**
 * Whether the labels meet every constraint.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
bool ck_result_feasible(const struct CkResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ck_result_iterations(const struct CkResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CKMEANS_H */
