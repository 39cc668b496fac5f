#ifndef TCS_H
#define TCS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum TcsStatus {
  TCS_STATUS_OK = 0,
  TCS_STATUS_NULL_POINTER = 1,
  TCS_STATUS_INVALID_ARGUMENT = 2,
  TCS_STATUS_PRECISION_EXHAUSTED = 3,
  TCS_STATUS_BUDGET_EXHAUSTED = 4,
  TCS_STATUS_OUT_OF_RANGE = 5,
  TCS_STATUS_INTERNAL = 6,
  TCS_STATUS_PANIC = 7,
} TcsStatus;

/**
 * Per-height speeds of one base; opaque to C.
 */
typedef struct TcsProfile TcsProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI version as `major * 10000 + minor * 100 + patch`.
 */
uint32_t tcs_ffi_version(void);

/**
 * Message for the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next `tcs_*` call on the same thread.
 */
const char *tcs_last_error(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void tcs_string_free(char *s);

/**
 * Constant congruence speed `V(a)` of the decimal integer `a`.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` must be writable.
 */
enum TcsStatus tcs_constant_speed(const char *a, uint64_t *out);

/**
 * `V(a, b)` computed modulo `10^digits`.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` must be writable.
 */
enum TcsStatus tcs_speed_at_height(const char *a, uint64_t b, uint32_t digits, uint64_t *out);

/**
 * `V(a)` from the closed form, confirmed by class membership.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` must be writable.
 */
enum TcsStatus tcs_speed_by_formula(const char *a, uint64_t *out);

/**
 * Smallest base with constant speed `n`, as a decimal string.
 *
 * # Safety
 * `out` must be writable; free the result with `tcs_string_free`.
 */
enum TcsStatus tcs_min_base(uint64_t n, char **out);

/**
 * Smallest base with last digit `s1` and constant speed `n >= 2`.
 *
 * # Safety
 * `out` must be writable; free the result with `tcs_string_free`.
 */
enum TcsStatus tcs_min_base_class(uint32_t s1, uint64_t n, char **out);

/**
 * Root `i` (1 to 13) of `y^5 = y` modulo `10^digits`, zero padded to `digits` characters.
 *
 * # Safety
 * `out` must be writable; free the result with `tcs_string_free`.
 */
enum TcsStatus tcs_root_residue(uint32_t i, uint32_t digits, char **out);

/**
 * Primality of the decimal integer `x`: exact below 2^64, Baillie–PSW above.
 *
 * # Safety
 * `x` must be a NUL-terminated string; `out` must be writable.
 */
enum TcsStatus tcs_is_prime(const char *x, bool *out);

/**
 * Smallest prime with constant speed `n`, testing at most `budget` candidates.
 *
 * # Safety
 * `out` must be writable; free the result with `tcs_string_free`.
 */
enum TcsStatus tcs_smallest_prime_with_speed(uint64_t n, uint64_t budget, char **out);

/**
 * Build the speed profile of `a` for heights `1..=max_height` modulo `10^digits`.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` must be writable. Release the
 * handle with `tcs_profile_free`.
 */
enum TcsStatus tcs_profile_new(const char *a,
                               uint64_t max_height,
                               uint32_t digits,
                               struct TcsProfile **out);

/**
 * Release a profile. NULL is ignored.
 *
 * # Safety
 * `p` must come from `tcs_profile_new` and not have been freed already.
 */
void tcs_profile_free(struct TcsProfile *p);

/**
 * Number of heights in the profile (0 for NULL).
 *
 * # Safety
 * `p` must be NULL or a live profile handle.
 */
size_t tcs_profile_len(const struct TcsProfile *p);

/**
 * `V(a, b)` for height `b` (1-based). `PrecisionExhausted` when unresolved.
 *
 * # Safety
 * `p` must be a live profile handle; `out` must be writable.
 */
enum TcsStatus tcs_profile_speed(const struct TcsProfile *p, uint64_t b, uint64_t *out);

/**
 * Frozen digit count `ν(b)`. `PrecisionExhausted` when only a lower bound is known.
 *
 * # Safety
 * `p` must be a live profile handle; `out` must be writable.
 */
enum TcsStatus tcs_profile_frozen(const struct TcsProfile *p, uint64_t b, uint64_t *out);

/**
 * Constant speed if the profile itself settles it; `PrecisionExhausted` otherwise.
 *
 * # Safety
 * `p` must be a live profile handle; `out` must be writable.
 */
enum TcsStatus tcs_profile_constant_speed(const struct TcsProfile *p, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TCS_H */
