#ifndef SUPERCYCLIC_H
#define SUPERCYCLIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_ARGUMENT = 2,
  SC_STATUS_CONFIG = 3,
  SC_STATUS_NUMERICAL = 4,
  SC_STATUS_PANIC = 5,
} ScStatus;

/**
 * Opaque operator family.
 */
typedef struct ScFamily ScFamily;

/**
 * Opaque square complex matrix.
 */
typedef struct ScOperator ScOperator;

typedef struct ScComplex {
  double re;
  double im;
} ScComplex;

/**
 * Outcome of an ε-supercyclicity test.
 */
typedef struct ScDensitySummary {
  bool pass;
  double worst_case;
  size_t worst_probe;
  size_t worst_member;
  size_t members_used;
} ScDensitySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sc_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer obtained from this library that has not
 * been freed.
 */
void sc_string_free(char *s);

/**
 * Builds a `dim`×`dim` operator from `dim*dim` row-major entries.
 *
 * # Safety
 * `entries` must point to `dim*dim` values and `out` must be writable.
 */
enum ScStatus sc_operator_new(size_t dim, const struct ScComplex *entries, struct ScOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from [`sc_operator_new`] not yet freed.
 */
void sc_operator_free(struct ScOperator *op);

/**
 * Projective distance from `u` to the line spanned by `v`, both of
 * length `dim`.
 *
 * # Safety
 * `u` and `v` must point to `dim` values and `out` must be writable.
 */
enum ScStatus sc_projective_distance(const struct ScComplex *u,
                                     const struct ScComplex *v,
                                     size_t dim,
                                     double *out);

/**
 * The family {diag(1, w)} over the square grid |Re w|, |Im w| ≤ `half_width`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ScStatus sc_family_diagonal_grid(double half_width, double step, struct ScFamily **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum ScStatus sc_family_identity(size_t dim, struct ScFamily **out);

/**
 * A family holding copies of `count` operators. The operators remain
 * owned by the caller.
 *
 * # Safety
 * `ops` must point to `count` valid operator handles and `out` must be
 * writable.
 */
enum ScStatus sc_family_finite(const struct ScOperator *const *ops,
                               size_t count,
                               struct ScFamily **out);

/**
 * The family {I, T, T², …, T^max_exponent}.
 *
 * # Safety
 * `base` must be a valid operator handle and `out` must be writable.
 */
enum ScStatus sc_family_powers_of(const struct ScOperator *base,
                                  size_t max_exponent,
                                  struct ScFamily **out);

/**
 * Number of members, or 0 for a null handle.
 *
 * # Safety
 * `family` must be null or a valid family handle.
 */
size_t sc_family_len(const struct ScFamily *family);

/**
 * Ambient dimension, or 0 for a null handle.
 *
 * # Safety
 * `family` must be null or a valid family handle.
 */
size_t sc_family_dim(const struct ScFamily *family);

/**
 * # Safety
 * `family` must be null or a handle from this library not yet freed.
 */
void sc_family_free(struct ScFamily *family);

/**
 * ε-supercyclicity of `x` against `probe_count` probes drawn from `seed`,
 * using at most `budget` members (0 keeps the default budget).
 *
 * # Safety
 * `family` must be a valid handle, `x` must point to `dim` values and
 * `out` must be writable.
 */
enum ScStatus sc_eps_supercyclic_test(const struct ScFamily *family,
                                      const struct ScComplex *x,
                                      size_t dim,
                                      size_t probe_count,
                                      uint64_t seed,
                                      double eps,
                                      size_t budget,
                                      struct ScDensitySummary *out);

/**
 * Runs a JSON scenario config and returns the JSON report through
 * `report_json` (free it with [`sc_string_free`]) together with the
 * command-line exit code: 0 PASS, 1 FAIL, 2 config error, 3 numerical
 * error. A numerical error still produces an ERROR report and returns
 * `SC_STATUS_OK`; a config error produces no report.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report_json` and
 * `exit_code` must be writable.
 */
enum ScStatus sc_run_scenario_json(const char *config_json, char **report_json, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERCYCLIC_H */
