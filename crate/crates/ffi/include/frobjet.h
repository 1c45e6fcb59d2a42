#ifndef FROBJET_H
#define FROBJET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Command selector for [`fj_run`].
 */
typedef enum FjCommand {
  FJ_COMMAND_VALIDATE = 0,
  FJ_COMMAND_HIERARCHY = 1,
  FJ_COMMAND_PENCIL = 2,
  FJ_COMMAND_VIRASORO = 3,
  FJ_COMMAND_INTEGRATE = 4,
  FJ_COMMAND_INTEGRATE_DOUBLE = 5,
  FJ_COMMAND_POLES = 6,
} FjCommand;

/**
 * Status codes returned by every entry point.
 */
typedef enum FjStatus {
  FJ_STATUS_OK = 0,
  /**
   * The report was produced and records a failed check.
   */
  FJ_STATUS_MATH_VIOLATION = 1,
  FJ_STATUS_INVALID_INPUT = 2,
  FJ_STATUS_MISSING_FIXTURE = 3,
  FJ_STATUS_NULL_POINTER = 4,
  FJ_STATUS_INVALID_UTF8 = 5,
  FJ_STATUS_PANIC = 6,
} FjStatus;

/**
 * Opaque manifold handle.
 */
typedef struct FjManifold FjManifold;

/**
 * Truncation overrides. `p_max` or `g_max` below 0, or `m_max` below −1,
 * keeps the configured value.
 */
typedef struct FjOptions {
  int32_t p_max;
  int32_t g_max;
  int32_t m_max;
} FjOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a manifold configuration from JSON text.
 *
 * # Safety
 * `json` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum FjStatus fj_manifold_from_json(const char *json, struct FjManifold **out);

/**
 * Reads a manifold configuration from a JSON file.
 *
 * # Safety
 * `path` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum FjStatus fj_manifold_from_path(const char *path, struct FjManifold **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `m` must be null or a handle returned by this library, not yet freed.
 */
void fj_manifold_free(struct FjManifold *m);

/**
 * Dimension of the manifold, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t fj_manifold_dimension(const struct FjManifold *m);

/**
 * Runs a command and stores its JSON report in `*report`.
 *
 * `expr` is required for `Integrate`, `IntegrateDouble` and `Poles` and
 * ignored otherwise. `options` may be null. The report is written for
 * `Ok` and `MathViolation`; on other codes `*report` is null.
 *
 * # Safety
 * `m` must be a live handle, `expr` null or a valid string, `options` null
 * or valid, and `report` a valid pointer.
 */
enum FjStatus fj_run(const struct FjManifold *m,
                     enum FjCommand command,
                     const char *expr,
                     const struct FjOptions *options,
                     char **report);

/**
 * Parses an expression and stores its canonical form in `*out`.
 *
 * # Safety
 * `expr` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum FjStatus fj_canonicalize(const char *expr, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void fj_string_free(char *s);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *fj_last_error(void);

/**
 * Library version as a static string.
 */
const char *fj_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROBJET_H */
