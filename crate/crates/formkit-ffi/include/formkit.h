#ifndef FORMKIT_H
#define FORMKIT_H

/* This header is generated by cbindgen from the formkit-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum FkStatus {
  FK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FK_STATUS_NULL_POINTER = 1,
  /**
   * Arguments failed validation (dimensions, tolerance ranges, UTF-8).
   */
  FK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The spec or expression text could not be parsed.
   */
  FK_STATUS_PARSE_ERROR = 3,
  /**
   * A numeric precondition failed (not Hermitian, not invertible, ...).
   */
  FK_STATUS_NUMERIC_ERROR = 4,
  /**
   * A certification guard refused the computation (condition guard,
   * singular metric).
   */
  FK_STATUS_GUARD_ERROR = 5,
} FkStatus;

/**
 * Opaque dense complex matrix handle.
 */
typedef struct FkMatrix FkMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent non-OK status on this thread, or null
 * when no error has occurred. The pointer stays valid until the next FFI
 * call on the same thread.
 */
const char *fk_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *fk_version(void);

/**
 * Builds a matrix from row-major interleaved `[re, im]` doubles
 * (`2 * rows * cols` values).
 *
 * # Safety
 * `data` must point to at least `2 * rows * cols` readable doubles and
 * `out` must be a valid location to store the handle.
 */
enum FkStatus fk_matrix_new(uintptr_t rows,
                            uintptr_t cols,
                            const double *data,
                            struct FkMatrix **out);

/**
 * Releases a matrix handle.
 *
 * # Safety
 * `m` must be a handle returned by this library, not yet freed; null is a
 * no-op.
 */
void fk_matrix_free(struct FkMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle.
 */
uintptr_t fk_matrix_rows(const struct FkMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle.
 */
uintptr_t fk_matrix_cols(const struct FkMatrix *m);

/**
 * Reads entry `(i, j)` into `re`/`im`.
 *
 * # Safety
 * `m` must be a valid handle; `re` and `im` must be writable.
 */
enum FkStatus fk_matrix_get(const struct FkMatrix *m,
                            uintptr_t i,
                            uintptr_t j,
                            double *re,
                            double *im);

/**
 * Largest singular value.
 *
 * # Safety
 * `m` must be a valid handle and `out` writable.
 */
enum FkStatus fk_operator_norm(const struct FkMatrix *m, double *out);

/**
 * Polar decomposition `T = U |T|`. Pass non-positive tolerances to use the
 * defaults (`rel_tol = 1e-10`, `rank_cutoff = 1e-12`).
 *
 * # Safety
 * `t` must be a valid handle; the out-pointers must be writable. On success
 * the caller owns both returned handles.
 */
enum FkStatus fk_polar(const struct FkMatrix *t,
                       double rel_tol,
                       double rank_cutoff,
                       struct FkMatrix **isometry_out,
                       struct FkMatrix **modulus_out,
                       uintptr_t *rank_out);

/**
 * `|T|^(1/2)` of a square matrix.
 *
 * # Safety
 * `t` must be a valid handle; `out` must be writable; the caller owns the
 * returned handle.
 */
enum FkStatus fk_modulus_half(const struct FkMatrix *t,
                              double rel_tol,
                              double rank_cutoff,
                              struct FkMatrix **out);

/**
 * Residual of the intertwining identity `|T*|^(1/2) U = U |T|^(1/2)`.
 *
 * # Safety
 * `t` must be a valid handle and `out` writable.
 */
enum FkStatus fk_intertwine_residual(const struct FkMatrix *t,
                                     double rel_tol,
                                     double rank_cutoff,
                                     double *out);

/**
 * Recovers the gram matrix of the unique form with associated operator `T`,
 * using a perturbation `B` with `T + B` invertible.
 *
 * # Safety
 * `t` and `b` must be valid handles; `out` must be writable; the caller
 * owns the returned handle.
 */
enum FkStatus fk_form_from_operator(const struct FkMatrix *t,
                                    const struct FkMatrix *b,
                                    double rel_tol,
                                    double rank_cutoff,
                                    struct FkMatrix **out);

/**
 * Runs a verification command (`polar`, `analyze`, `second-rep`,
 * `from-operator`, or `diagonal`) on a JSON problem spec and returns the
 * JSON report. `samples == 0` uses the default sample count. Reports never
 * carry timestamps, so identical inputs give byte-identical output.
 *
 * # Safety
 * `command` and `spec_json` must be valid NUL-terminated strings;
 * `report_out` must be writable. Free the returned string with
 * [`fk_string_free`].
 */
enum FkStatus fk_run_spec(const char *command,
                          const char *spec_json,
                          uint64_t seed,
                          uintptr_t samples,
                          char **report_out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by [`fk_run_spec`], not yet freed; null is a
 * no-op.
 */
void fk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORMKIT_H */
