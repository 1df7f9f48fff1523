#ifndef LOWENV_H
#define LOWENV_H

#pragma once

/* Generated by cbindgen from the lowenv-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
enum LowenvStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  /**
   * Success.
   */
  LOWENV_STATUS_OK = 0,
  /**
   * The computation failed; see `lowenv_last_error`.
   */
  LOWENV_STATUS_COMPUTATION = 1,
  /**
   * The configuration or an argument was invalid.
   */
  LOWENV_STATUS_CONFIG = 2,
  /**
   * A required pointer was null or a string was not valid UTF-8.
   */
  LOWENV_STATUS_NULL_ARGUMENT = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  LOWENV_STATUS_PANIC = 4,
};
#ifndef __cplusplus
typedef int32_t LowenvStatus;
#endif // __cplusplus

/**
 * An estimation result. Opaque; query through the accessor functions and
 * release with `lowenv_result_free`.
 */
typedef struct LowenvResult LowenvResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The last error message raised on this thread. The pointer stays valid
 * until the next failing library call on the same thread; do not free it.
 */
const char *lowenv_last_error(void);

/**
 * The library version as a static string; do not free it.
 */
const char *lowenv_version(void);

/**
 * Runs a lower-envelope estimate from a JSON configuration with the same
 * schema as the `estimate` CLI subcommand. On success `*out` owns a result
 * handle.
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
LowenvStatus lowenv_estimate_json(const char *config_json, struct LowenvResult **out);

/**
 * The estimated lower-envelope value.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
double lowenv_result_value(const struct LowenvResult *result);

/**
 * Dimension of the minimizing parameter.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
uintptr_t lowenv_result_argmin_len(const struct LowenvResult *result);

/**
 * Component `index` of the minimizing parameter; NaN when out of range.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
double lowenv_result_argmin(const struct LowenvResult *result, uintptr_t index);

/**
 * Number of samples that violated the support-superset assumption.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
uintptr_t lowenv_result_support_violations(const struct LowenvResult *result);

/**
 * Serializes the full result (including the solver trace) as JSON. The
 * returned string must be released with `lowenv_string_free`.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
char *lowenv_result_to_json(const struct LowenvResult *result);

/**
 * Releases a result handle. Passing null is a no-op.
 *
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void lowenv_result_free(struct LowenvResult *result);

/**
 * Releases a string returned by this library. Passing null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void lowenv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOWENV_H */
