/* C interface to the stagec two-stage compiler. */

#ifndef STAGEC_H
#define STAGEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum StagecStatus {
  /**
   * The call succeeded; the result holds output text.
   */
  StagecStatus_Ok = 0,
  /**
   * The input program was rejected; the result holds a diagnostic.
   */
  StagecStatus_Rejected = 1,
  /**
   * Null pointer, malformed UTF-8, or an unknown declaration name.
   */
  StagecStatus_Usage = 2,
  /**
   * An internal panic was caught; the result holds its message.
   */
  StagecStatus_Panic = 3,
} StagecStatus;

/**
 * Opaque result handle owning the output and diagnostic strings.
 */
typedef struct StagecResult StagecResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Type checks `source`. On success the output is a one-line summary.
 *
 * # Safety
 * `source` must be null or NUL-terminated; `out`, when non-null, must
 * point to writable storage for one pointer.
 */
enum StagecStatus stagec_check(const char *source, uint64_t fuel_steps, struct StagecResult **out);

/**
 * Runs all stage-1 computation in `source` and returns the residual
 * object program, or just `main_decl`'s staged body when that is
 * non-null. With `verify`, the output is re-checked by the standalone
 * object checker first.
 *
 * # Safety
 * As for [`stagec_check`]; `main_decl` may be null.
 */
enum StagecStatus stagec_stage(const char *source,
                               const char *main_decl,
                               bool verify,
                               uint64_t fuel_steps,
                               struct StagecResult **out);

/**
 * Prints the normal form of `decl`'s body.
 *
 * # Safety
 * As for [`stagec_check`]; `decl` must be non-null.
 */
enum StagecStatus stagec_nf(const char *source,
                            const char *decl,
                            uint64_t fuel_steps,
                            struct StagecResult **out);

/**
 * The output text of a result, NUL-terminated, owned by the handle.
 * Null handles yield an empty string.
 *
 * # Safety
 * `r` must be null or a handle from this library that has not been
 * freed.
 */
const char *stagec_result_output(const struct StagecResult *r);

/**
 * The diagnostic text of a result; empty when the call succeeded.
 *
 * # Safety
 * As for [`stagec_result_output`].
 */
const char *stagec_result_error(const struct StagecResult *r);

/**
 * Frees a result handle. Null is a no-op; freeing twice is undefined.
 *
 * # Safety
 * `r` must be null or a handle from this library that has not been
 * freed.
 */
void stagec_result_free(struct StagecResult *r);

/**
 * The library version as a static NUL-terminated string.
 */
const char *stagec_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* STAGEC_H */
