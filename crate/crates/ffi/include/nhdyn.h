#ifndef NHDYN_H
#define NHDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NhdynStatus {
  NHDYN_STATUS_OK = 0,
  NHDYN_STATUS_NULL_POINTER = 1,
  NHDYN_STATUS_INVALID_ARGUMENT = 2,
  NHDYN_STATUS_NUMERICAL = 3,
  NHDYN_STATUS_VALIDATION = 4,
  NHDYN_STATUS_IO = 5,
  NHDYN_STATUS_PANIC = 6,
} NhdynStatus;

typedef struct NhdynBiortho NhdynBiortho;

typedef struct NhdynDmModel NhdynDmModel;

typedef struct NhdynMatrix NhdynMatrix;

typedef struct NhdynSymmetryBasis NhdynSymmetryBasis;

typedef struct NhdynComplex {
  double re;
  double im;
} NhdynComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library from the same thread.
 */
const char *nhdyn_last_error(void);

/**
 * Static version string.
 */
const char *nhdyn_version(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void nhdyn_string_free(char *s);

/**
 * Builds a `rows × cols` matrix from `rows * cols` row-major entries.
 *
 * # Safety
 * `entries` must point to `rows * cols` values; `out` must be writable.
 */
enum NhdynStatus nhdyn_matrix_new(size_t rows,
                                  size_t cols,
                                  const struct NhdynComplex *entries,
                                  struct NhdynMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a live matrix handle.
 */
void nhdyn_matrix_free(struct NhdynMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle; `rows` and `cols` must be writable.
 */
enum NhdynStatus nhdyn_matrix_shape(const struct NhdynMatrix *m, size_t *rows, size_t *cols);

/**
 * Copies the entries row-major into `buf`, which holds `len` values.
 *
 * # Safety
 * `m` must be a live handle; `buf` must have room for `len` values.
 */
enum NhdynStatus nhdyn_matrix_copy(const struct NhdynMatrix *m,
                                   struct NhdynComplex *buf,
                                   size_t len);

/**
 * Matrix exponential `e^A`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_expm(const struct NhdynMatrix *a, struct NhdynMatrix **out);

/**
 * Operator 2-norm (largest singular value).
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_op_norm(const struct NhdynMatrix *a, double *out);

/**
 * `e^{iH†t} X e^{−iHt}`.
 *
 * # Safety
 * `h` and `x` must be live handles; `out` must be writable.
 */
enum NhdynStatus nhdyn_gamma_t(const struct NhdynMatrix *h,
                               const struct NhdynMatrix *x,
                               double t,
                               struct NhdynMatrix **out);

/**
 * `i(H†X − XH)`.
 *
 * # Safety
 * `h` and `x` must be live handles; `out` must be writable.
 */
enum NhdynStatus nhdyn_delta_gamma(const struct NhdynMatrix *h,
                                   const struct NhdynMatrix *x,
                                   struct NhdynMatrix **out);

/**
 * State-dependent generator `H + ½⟨Ψ̂,(H†−H)Ψ̂⟩𝟙` for a unit vector of
 * length `len`.
 *
 * # Safety
 * `h` must be a live handle; `state` must hold `len` values.
 */
enum NhdynStatus nhdyn_h_nl(const struct NhdynMatrix *h,
                            const struct NhdynComplex *state,
                            size_t len,
                            struct NhdynMatrix **out);

/**
 * Orthonormal basis of solutions of `H†X = XH`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_symmetry_basis(const struct NhdynMatrix *h,
                                      double rank_tol_rel,
                                      struct NhdynSymmetryBasis **out);

/**
 * # Safety
 * `b` must be a live handle; `len` must be writable.
 */
enum NhdynStatus nhdyn_symmetry_basis_len(const struct NhdynSymmetryBasis *b, size_t *len);

/**
 * Copies generator `k` (0-based) into a new matrix handle.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_symmetry_basis_get(const struct NhdynSymmetryBasis *b,
                                          size_t k,
                                          struct NhdynMatrix **out);

/**
 * # Safety
 * `b` must be NULL or a live handle.
 */
void nhdyn_symmetry_basis_free(struct NhdynSymmetryBasis *b);

/**
 * Biorthogonal eigensystem of a diagonalizable `H` with simple spectrum.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_biortho_new(const struct NhdynMatrix *h,
                                   double tol_distinct,
                                   struct NhdynBiortho **out);

/**
 * Writes the eigenvalues (sorted by real, then imaginary part) into `buf`.
 *
 * # Safety
 * `b` must be a live handle; `buf` must have room for `len` values.
 */
enum NhdynStatus nhdyn_biortho_eigenvalues(const struct NhdynBiortho *b,
                                           struct NhdynComplex *buf,
                                           size_t len);

/**
 * Condition number of the eigenvector matrix.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_biortho_condition(const struct NhdynBiortho *b, double *out);

/**
 * Metric operators `S_φ` (`which == 0`) or `S_Ψ` (`which == 1`).
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_biortho_metric(const struct NhdynBiortho *b,
                                      uint32_t which,
                                      struct NhdynMatrix **out);

/**
 * # Safety
 * `b` must be NULL or a live handle.
 */
void nhdyn_biortho_free(struct NhdynBiortho *b);

/**
 * Three-mode fermion model `H = b₁†(λb₂ + μb₃)`, `λ, μ > 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum NhdynStatus nhdyn_dm_model_new(double lambda, double mu, struct NhdynDmModel **out);

/**
 * Copies the 8×8 Hamiltonian into a new matrix handle.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum NhdynStatus nhdyn_dm_model_hamiltonian(const struct NhdynDmModel *m, struct NhdynMatrix **out);

/**
 * Occupations `n₁, n₂, n₃` along the normalized trajectory started at the
 * basis state `label` (e.g. "011"). Writes `3 * len` values, one triple
 * per time.
 *
 * # Safety
 * `m` must be a live handle, `label` a NUL-terminated string, `times` must
 * hold `len` values and `out` must have room for `3 * len`.
 */
enum NhdynStatus nhdyn_dm_occupations(const struct NhdynDmModel *m,
                                      const char *label,
                                      const double *times,
                                      size_t len,
                                      double *out);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
void nhdyn_dm_model_free(struct NhdynDmModel *m);

/**
 * Runs a JSON scenario. When `out_dir` is non-NULL the CSV files and
 * report.json are written there. `report` receives the report JSON (free
 * it with [`nhdyn_string_free`]) and `exit_status` the report's exit
 * status (0, or 3 when some task failed numerically).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string, `out_dir` NULL or one;
 * `report` and `exit_status` must be writable.
 */
enum NhdynStatus nhdyn_run_scenario_json(const char *config_json,
                                         const char *out_dir,
                                         char **report,
                                         int32_t *exit_status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NHDYN_H */
