/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LOCSPEC_H
#define LOCSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsMode {
  LS_MODE_MAGNITUDE = 0,
  LS_MODE_SIGNED = 1,
} LsMode;

typedef enum LsMethod {
  LS_METHOD_AUTO = 0,
  LS_METHOD_DENSE = 1,
  LS_METHOD_RANDOMIZED = 2,
} LsMethod;

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_ARGUMENT = 2,
  LS_STATUS_OUT_OF_RANGE = 3,
  // Eigen-residual or other numerical check failed.
  LS_STATUS_NUMERICAL = 4,
  // Malformed input bytes (PGM or CSV).
  LS_STATUS_PARSE = 5,
  // A Rust panic was caught at the boundary.
  LS_STATUS_INTERNAL = 6,
} LsStatus;

// Opaque data matrix, one point per row.
typedef struct LsData LsData;

// Opaque search result.
typedef struct LsResult LsResult;

// Search parameters. Start from `ls_params_default()`.
typedef struct LsParams {
  // Kernel bandwidth; zero, negative or NaN selects the median heuristic.
  double epsilon;
  size_t k;
  size_t l;
  size_t oversampling;
  size_t power_iterations;
  uint64_t seed;
  enum LsMode mode;
  enum LsMethod method;
  bool weight_eigenvalues;
} LsParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default parameters: median bandwidth, k = 3, l = 15, p = 10, q = 10, seed 0, magnitude
// mode, automatic method.
struct LsParams ls_params_default(void);

// Copies a row-major `rows × cols` matrix into a new data handle.
//
// # Safety
// `values` must point to `rows * cols` readable doubles and `out` to writable storage.
enum LsStatus ls_data_new(const double *values, size_t rows, size_t cols, struct LsData **out);

// Parses a P2/P5 graymap and builds one row per 3×3 patch (row-major patch order).
// The patch grid size is written to `out_grid_height` and `out_grid_width`.
//
// # Safety
// `bytes` must point to `len` readable bytes; the out pointers must be writable.
enum LsStatus ls_data_from_pgm_patches(const uint8_t *bytes,
                                       size_t len,
                                       size_t *out_grid_height,
                                       size_t *out_grid_width,
                                       struct LsData **out);

// Number of points (rows), or 0 for a null handle.
//
// # Safety
// `data` must be null or a live handle from this library.
size_t ls_data_rows(const struct LsData *data);

// # Safety
// `data` must be null or a handle not yet freed.
void ls_data_free(struct LsData *data);

// Scores every point against row `reference`.
//
// # Safety
// `data` must be a live handle, `params` readable and `out` writable.
enum LsStatus ls_search(const struct LsData *data,
                        size_t reference,
                        const struct LsParams *params,
                        struct LsResult **out);

// Number of scores (points), or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t ls_result_len(const struct LsResult *result);

// Bandwidth actually used, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double ls_result_epsilon(const struct LsResult *result);

// Largest eigen-residual `‖A u − λ u‖₂`, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double ls_result_residual(const struct LsResult *result);

// Copies all `ls_result_len` scores into `out` (capacity `len`).
//
// # Safety
// `result` must be a live handle and `out` writable for `len` doubles.
enum LsStatus ls_result_scores(const struct LsResult *result, double *out, size_t len);

// Copies the `ls_result_len - 1` non-reference indices, most similar first.
//
// # Safety
// `result` must be a live handle and `out` writable for `len` values.
enum LsStatus ls_result_order(const struct LsResult *result, size_t *out, size_t len);

// Number of eigenvalues computed (`l`), or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t ls_result_eigenvalue_count(const struct LsResult *result);

// Copies the eigenvalues, largest first.
//
// # Safety
// `result` must be a live handle and `out` writable for `len` doubles.
enum LsStatus ls_result_eigenvalues(const struct LsResult *result, double *out, size_t len);

// 1-based rank of `target` (1 = most similar).
//
// # Safety
// `result` must be a live handle and `out_rank` writable.
enum LsStatus ls_result_rank_of(const struct LsResult *result, size_t target, size_t *out_rank);

// # Safety
// `result` must be null or a handle not yet freed.
void ls_result_free(struct LsResult *result);

// Rank of `target` among all points ordered by Euclidean distance to `reference`.
//
// # Safety
// `data` must be a live handle and `out_rank` writable.
enum LsStatus ls_nn_rank(const struct LsData *data,
                         size_t reference,
                         size_t target,
                         size_t *out_rank);

// Message for the most recent failure on this thread, or null if none. The pointer stays
// valid until the next failing call on the same thread.
const char *ls_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ls_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCSPEC_H */
