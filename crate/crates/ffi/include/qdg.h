#ifndef QDG_H
#define QDG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum QdgStatus {
  QDG_STATUS_OK = 0,
  QDG_STATUS_NULL_POINTER = 1,
  QDG_STATUS_INVALID_ARGUMENT = 2,
  QDG_STATUS_NOT_HERMITIAN = 3,
  QDG_STATUS_DIMENSION_MISMATCH = 4,
  QDG_STATUS_NOT_UNITARY = 5,
  QDG_STATUS_NOT_PROJECTOR = 6,
  QDG_STATUS_NOT_DENSITY_MATRIX = 7,
  QDG_STATUS_INCOHERENT = 8,
  QDG_STATUS_EMPTY_CREDAL_SET = 9,
  QDG_STATUS_UNDEFINED_CONDITIONING = 10,
  QDG_STATUS_UNSUPPORTED = 11,
  QDG_STATUS_SOLVER_FAILURE = 12,
  QDG_STATUS_PARSE_ERROR = 13,
  QDG_STATUS_PANIC = 14,
} QdgStatus;

/**
 * Opaque credal set.
 */
typedef struct QdgCredalSet QdgCredalSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 when there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t qdg_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qdg_version(void);

/**
 * Coherence of `count` gambles of dimension `n`. `strict[k]` is non-zero for
 * a strict assessment. On return `coherent` is 1 or 0 and `margin` holds the
 * margin; for incoherent input `alpha` (length `count`, may be null) and
 * `beta` (may be null) receive the partial-loss certificate.
 *
 * # Safety
 * Arrays must hold `count * n * n` (matrices) and `count` (flags) elements.
 */
enum QdgStatus qdg_check_coherence(size_t n,
                                   size_t count,
                                   const double *re,
                                   const double *im,
                                   const uint8_t *strict,
                                   int32_t *coherent,
                                   double *margin,
                                   double *alpha,
                                   double *beta);

/**
 * All density matrices of dimension `n`. Returns null for `n == 0`.
 */
struct QdgCredalSet *qdg_credal_vacuous(size_t n);

/**
 * Credal set dual to coherent assessments; `Incoherent` otherwise.
 *
 * # Safety
 * As for [`qdg_check_coherence`]; `out` must be writable.
 */
enum QdgStatus qdg_credal_from_assessments(size_t n,
                                           size_t count,
                                           const double *re,
                                           const double *im,
                                           const uint8_t *strict,
                                           struct QdgCredalSet **out);

/**
 * Convex hull of `count` density matrices.
 *
 * # Safety
 * Arrays must hold `count * n * n` elements; `out` must be writable.
 */
enum QdgStatus qdg_credal_from_extreme_points(size_t n,
                                              size_t count,
                                              const double *re,
                                              const double *im,
                                              struct QdgCredalSet **out);

/**
 * # Safety
 * `set` must come from this library and not be used afterwards.
 */
void qdg_credal_free(struct QdgCredalSet *set);

/**
 * Dimension of the set, 0 for a null handle.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t qdg_credal_dim(const struct QdgCredalSet *set);

/**
 * Lower and upper prevision of a gamble of the set's dimension.
 *
 * # Safety
 * `set` must be live; arrays must hold `n * n` elements.
 */
enum QdgStatus qdg_prevision(const struct QdgCredalSet *set,
                             const double *re,
                             const double *im,
                             double *lower,
                             double *upper);

/**
 * Membership of a density matrix.
 *
 * # Safety
 * As for [`qdg_prevision`].
 */
enum QdgStatus qdg_credal_contains(const struct QdgCredalSet *set,
                                   const double *re,
                                   const double *im,
                                   int32_t *member);

/**
 * Selective conditioning on a projector.
 *
 * # Safety
 * As for [`qdg_prevision`]; `out` must be writable.
 */
enum QdgStatus qdg_credal_condition(const struct QdgCredalSet *set,
                                    const double *re,
                                    const double *im,
                                    struct QdgCredalSet **out);

/**
 * Evolution by a unitary (or, with `antiunitary != 0`, by `U` composed with
 * complex conjugation).
 *
 * # Safety
 * As for [`qdg_credal_condition`].
 */
enum QdgStatus qdg_credal_evolve(const struct QdgCredalSet *set,
                                 const double *re,
                                 const double *im,
                                 int32_t antiunitary,
                                 struct QdgCredalSet **out);

/**
 * Marginal on factor A (`keep == 0`) or B (otherwise) of a set on
 * `n_a * n_b` dimensions.
 *
 * # Safety
 * `set` must be live and `out` writable.
 */
enum QdgStatus qdg_credal_marginal(const struct QdgCredalSet *set,
                                   size_t n_a,
                                   size_t n_b,
                                   int32_t keep,
                                   struct QdgCredalSet **out);

/**
 * Natural extension of two marginal sets.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum QdgStatus qdg_natural_extension(const struct QdgCredalSet *a,
                                     const struct QdgCredalSet *b,
                                     struct QdgCredalSet **out);

/**
 * Born probabilities of `count` projectors (a complete measurement) on a
 * state. `probs` receives `count` values.
 *
 * # Safety
 * `rho_*` hold `n * n` elements, `proj_*` hold `count * n * n`.
 */
enum QdgStatus qdg_born_probabilities(size_t n,
                                      const double *rho_re,
                                      const double *rho_im,
                                      size_t count,
                                      const double *proj_re,
                                      const double *proj_im,
                                      double *probs);

/**
 * The four separability bounds of a state on `n_a * n_b` dimensions.
 * `min_eigenvalues` and `holds` receive four entries each.
 *
 * # Safety
 * Arrays must hold `(n_a n_b)^2` elements; outputs four.
 */
enum QdgStatus qdg_frechet_check(size_t n_a,
                                 size_t n_b,
                                 const double *re,
                                 const double *im,
                                 double *min_eigenvalues,
                                 int32_t *holds);

/**
 * Runs a CLI command (e.g. `"check"`) on scenario JSON and returns the JSON
 * report through `report` (free with `qdg_string_free`) and the command's
 * exit code through `exit_code`.
 *
 * # Safety
 * `command` and `scenario` must be NUL-terminated strings.
 */
enum QdgStatus qdg_run_scenario(const char *command,
                                const char *scenario,
                                char **report,
                                int32_t *exit_code);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void qdg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDG_H */
