#ifndef COLOMBEAU_LAB_H
#define COLOMBEAU_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_INVALID_PARAM = 3,
  CL_STATUS_ORDER_BUDGET = 4,
  CL_STATUS_UNKNOWN_FUNCTION = 5,
  CL_STATUS_NON_CONVERGENCE = 6,
  CL_STATUS_CONSTRUCTION = 7,
  CL_STATUS_DOMAIN = 8,
  CL_STATUS_EMPTY_SET = 9,
  CL_STATUS_SYNTAX = 10,
  CL_STATUS_INSUFFICIENT_SAMPLES = 11,
  CL_STATUS_UNSUPPORTED = 12,
  CL_STATUS_JSON = 13,
  CL_STATUS_PANIC = 14,
} ClStatus;

/**
 * A parsed expression bound to its domain.
 */
typedef struct ClExpr ClExpr;

/**
 * A moment mollifier.
 */
typedef struct ClMollifier ClMollifier;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a
 * success. Valid until the next call on this thread.
 */
const char *cl_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *cl_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void cl_string_free(char *s);

/**
 * Builds `φ ∈ 𝒜_q` supported in `[-radius, radius]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ClStatus cl_mollifier_new(size_t q, double radius, struct ClMollifier **out);

/**
 * # Safety
 * `phi` must come from this library or be null.
 */
void cl_mollifier_free(struct ClMollifier *phi);

/**
 * `S_ε φ`.
 *
 * # Safety
 * `phi` must be a live handle, `out` writable.
 */
enum ClStatus cl_mollifier_scale(const struct ClMollifier *phi,
                                 double eps,
                                 struct ClMollifier **out);

/**
 * `φ^(order)(t)`.
 *
 * # Safety
 * `phi` must be a live handle, `out` writable.
 */
enum ClStatus cl_mollifier_eval(const struct ClMollifier *phi, double t, size_t order, double *out);

/**
 * `∫ t^j φ(t) dt`.
 *
 * # Safety
 * `phi` must be a live handle, `out` writable.
 */
enum ClStatus cl_mollifier_moment(const struct ClMollifier *phi, size_t j, double *out);

/**
 * `{"q", "radius", "coefficients"}`.
 *
 * # Safety
 * `phi` must be a live handle, `out` writable.
 */
enum ClStatus cl_mollifier_to_json(const struct ClMollifier *phi, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string, `out` writable.
 */
enum ClStatus cl_mollifier_from_json(const char *json, struct ClMollifier **out);

/**
 * Parses an expression on `Ω = (lo, hi)`; infinities are allowed.
 *
 * # Safety
 * `text` must be a NUL-terminated string, `out` writable.
 */
enum ClStatus cl_expr_parse(const char *text, double lo, double hi, struct ClExpr **out);

/**
 * # Safety
 * `expr` must come from this library or be null.
 */
void cl_expr_free(struct ClExpr *expr);

/**
 * Canonical text of the expression.
 *
 * # Safety
 * `expr` must be a live handle, `out` writable.
 */
enum ClStatus cl_expr_format(const struct ClExpr *expr, char **out);

/**
 * `∂^order R(φ, x)`.
 *
 * # Safety
 * Handles must be live, `out` writable.
 */
enum ClStatus cl_expr_eval(const struct ClExpr *expr,
                           const struct ClMollifier *phi,
                           double x,
                           size_t order,
                           double *out);

/**
 * Log-log slope of `ε ↦ ‖R(S_εφ, ·)‖_{K,m}` over `ε = base^(-k)`,
 * `k_min ≤ k ≤ k_max`, sup taken on `grid_points` uniform nodes plus
 * refinement.
 *
 * # Safety
 * Handles must be live, `out` writable.
 */
enum ClStatus cl_sweep_slope(const struct ClExpr *expr,
                             const struct ClMollifier *phi,
                             double k_lo,
                             double k_hi,
                             size_t m,
                             double base,
                             uint32_t k_min,
                             uint32_t k_max,
                             size_t grid_points,
                             double *out);

/**
 * Negligibility falsifier with the default family `{sin, x³}` and the
 * grid `ε = √2^(-k)`, `2 ≤ k ≤ 16`. Writes 0 when consistent with
 * negligible, otherwise the refuted degree.
 *
 * # Safety
 * `expr` must be a live handle, `out_degree` writable.
 */
enum ClStatus cl_negligibility(const struct ClExpr *expr,
                               double k_lo,
                               double k_hi,
                               size_t m,
                               size_t c,
                               size_t l,
                               size_t d_max,
                               size_t grid_points,
                               size_t *out_degree);

/**
 * Runs a CLI configuration given as JSON (the `--config` format) and
 * writes the result object. `exit_code` receives the CLI exit code.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string, outputs writable.
 */
enum ClStatus cl_run_json(const char *config_json, char **out, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLOMBEAU_LAB_H */
