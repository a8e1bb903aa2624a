#ifndef ELLGREEN_H
#define ELLGREEN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum EgStatus {
  EG_STATUS_OK = 0,
  // The computation ran but the check it performs did not pass.
  EG_STATUS_CHECK_FAILED = 1,
  EG_STATUS_NULL_POINTER = 2,
  EG_STATUS_INVALID_UTF8 = 3,
  EG_STATUS_INVALID_INPUT = 4,
  EG_STATUS_ZERO_POINT = 5,
  EG_STATUS_PRECISION_TOO_LOW = 6,
  EG_STATUS_NON_CONVERGENT = 7,
  EG_STATUS_DIVERGENT_INPUT = 8,
  EG_STATUS_ODD_INPUT = 9,
  EG_STATUS_NOT_PRIME = 10,
  EG_STATUS_OVERFLOW = 11,
  EG_STATUS_DEPENDENT_ROWS = 12,
  // A Rust panic was caught at the boundary.
  EG_STATUS_PANIC = 13,
} EgStatus;

// Evaluation path for [`eg_phi`].
typedef enum EgMethod {
  EG_METHOD_SIGMA = 0,
  EG_METHOD_SIEGEL = 1,
  EG_METHOD_KRONECKER = 2,
} EgMethod;

// Outcome of [`eg_unit_check`].
typedef enum EgVerdict {
  EG_VERDICT_UNIT = 0,
  EG_VERDICT_UNIT_AWAY_FROM_N = 1,
  EG_VERDICT_UNRECOGNIZED = 2,
} EgVerdict;

// Opaque precision context.
typedef struct EgContext EgContext;

// Opaque point of the upper half-plane.
typedef struct EgTau EgTau;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static storage.
const char *eg_version(void);

// Message of the last failed call on this thread, or null. Valid until the next failure.
const char *eg_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void eg_string_free(char *s);

// New precision context of `bits` target bits plus `guard` guard bits (`bits >= 64`).
//
// # Safety
// `out` must be valid for writes.
enum EgStatus eg_context_new(uint32_t bits, uint32_t guard, struct EgContext **out);

// # Safety
// `ctx` must come from [`eg_context_new`] and not be used afterwards. Null is ignored.
void eg_context_free(struct EgContext *ctx);

// Target precision of a context, 0 for null.
//
// # Safety
// `ctx` must be null or a live handle.
uint32_t eg_context_bits(const struct EgContext *ctx);

// Parses `"re,im"` with rational or decimal parts, or one of the presets `i`, `2i`, `rho`.
//
// # Safety
// `text` must be a NUL-terminated string, `out` valid for writes.
enum EgStatus eg_tau_parse(const char *text, struct EgTau **out);

// # Safety
// `tau` must come from [`eg_tau_parse`] and not be used afterwards. Null is ignored.
void eg_tau_free(struct EgTau *tau);

// Green function at `z = "a1,a2"` (exact rationals). Writes a decimal string with all
// trusted digits to `out_decimal` and, if `out_approx` is not null, a double.
//
// # Safety
// Handles must be live, `z` NUL-terminated, `out_decimal` valid for writes.
enum EgStatus eg_phi(const struct EgContext *ctx,
                     const struct EgTau *tau,
                     const char *z,
                     enum EgMethod method,
                     double *out_approx,
                     char **out_decimal);

// Distribution relation at `z` for multiplier `n`. Returns `Ok` when it holds,
// `CheckFailed` when it does not; `out_json` (optional) receives the report.
//
// # Safety
// Handles must be live, `z` NUL-terminated, `out_json` null or valid for writes.
enum EgStatus eg_check_distribution(const struct EgContext *ctx,
                                    const struct EgTau *tau,
                                    const char *z,
                                    uint64_t n,
                                    char **out_json);

// `N_2g` as a decimal integer string.
//
// # Safety
// `out` must be valid for writes.
enum EgStatus eg_n2g(uint64_t g, char **out);

// Bernoulli number `B_t` (`B_1 = -1/2`) as `"p/q"` or an integer; `t <= 1000`.
//
// # Safety
// `out` must be valid for writes.
enum EgStatus eg_bernoulli(uint32_t t, char **out);

// Refined and coarse bounds on the order of `x -> x^c` on the ratio sets for `n`.
//
// # Safety
// Both out pointers must be valid for writes.
enum EgStatus eg_ratio_order_bound(uint64_t n, uint64_t c, char **out_refined, char **out_coarse);

// Recognizes `exp(24 n phi)` at the torsion point `(p1/q, p2/q)` (context of at least 512 bits),
// replicating at twice the precision. `out_polynomial` (optional) receives the minimal
// polynomial or an empty string when nothing was recognized.
//
// # Safety
// Handles must be live; `out_verdict` valid for writes; `out_polynomial` null or valid.
enum EgStatus eg_unit_check(const struct EgContext *ctx,
                            const struct EgTau *tau,
                            int64_t p1,
                            int64_t p2,
                            uint64_t q,
                            uint32_t maxdeg,
                            enum EgVerdict *out_verdict,
                            char **out_polynomial);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLGREEN_H */
