#ifndef DNORM_H
#define DNORM_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * The computation requested by [`dnorm_run`].
 */
typedef enum DnormCommand {
  DNORM_COMMAND_NORMALIZE_DIRECT = 0,
  DNORM_COMMAND_NORMALIZE_RENORM = 1,
  DNORM_COMMAND_NORMALIZE_EV = 2,
  DNORM_COMMAND_CORRECT = 3,
  DNORM_COMMAND_LINEARIZE = 4,
  DNORM_COMMAND_BIRKHOFF = 5,
  DNORM_COMMAND_CHECK = 6,
} DnormCommand;

/**
 * Result of an FFI call. Values 2 to 5 match the `dnorm` exit codes.
 */
typedef enum DnormStatus {
  DNORM_STATUS_OK = 0,
  DNORM_STATUS_PARSE = 2,
  DNORM_STATUS_RESONANCE = 3,
  DNORM_STATUS_VALIDITY = 4,
  DNORM_STATUS_INVARIANT = 5,
  DNORM_STATUS_NULL_POINTER = 10,
  DNORM_STATUS_INVALID_UTF8 = 11,
  DNORM_STATUS_INVALID_ARGUMENT = 12,
  DNORM_STATUS_PANIC = 13,
} DnormStatus;

/**
 * A parsed problem file.
 */
typedef struct DnormProblem DnormProblem;

/**
 * The outcome of one run, with its JSON rendering.
 */
typedef struct DnormReport DnormReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *dnorm_last_error(void);

/**
 * Library version as a static string.
 */
const char *dnorm_version(void);

/**
 * Parses problem-file text into a new handle stored in `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DnormStatus dnorm_problem_parse(const char *text, struct DnormProblem **out);

/**
 * Releases a problem. NULL is ignored.
 *
 * # Safety
 * `p` must come from [`dnorm_problem_parse`] and not be used afterwards.
 */
void dnorm_problem_free(struct DnormProblem *p);

/**
 * Overrides the grade order `N`; `order` must be positive.
 *
 * # Safety
 * `p` must be a live problem handle.
 */
enum DnormStatus dnorm_problem_set_order(struct DnormProblem *p, uint32_t order);

/**
 * Overrides the `e`-validity target `K`; `k` must be non-negative.
 *
 * # Safety
 * `p` must be a live problem handle.
 */
enum DnormStatus dnorm_problem_set_eps_order(struct DnormProblem *p, int32_t k);

/**
 * Overrides the twist truncation `T`.
 *
 * # Safety
 * `p` must be a live problem handle.
 */
enum DnormStatus dnorm_problem_set_tau_order(struct DnormProblem *p, uint8_t t);

/**
 * Canonical problem-file text; release with [`dnorm_string_free`].
 *
 * # Safety
 * `p` must be a live problem handle.
 */
char *dnorm_problem_serialize(const struct DnormProblem *p);

/**
 * Runs `command` on `p` and stores the report in `*out`.
 *
 * A report is produced whenever the problem was readable, including for
 * resonant or otherwise failing runs; the status then mirrors the report's
 * exit code.
 *
 * # Safety
 * `p` must be a live problem handle and `out` a valid pointer.
 */
enum DnormStatus dnorm_run(const struct DnormProblem *p,
                           enum DnormCommand command,
                           struct DnormReport **out);

/**
 * JSON text of a report, borrowed from the handle.
 *
 * # Safety
 * `r` must be a live report handle or NULL.
 */
const char *dnorm_report_json(const struct DnormReport *r);

/**
 * Exit code recorded in a report, or -1 for NULL.
 *
 * # Safety
 * `r` must be a live report handle or NULL.
 */
int32_t dnorm_report_exit(const struct DnormReport *r);

/**
 * Number of checks in a report, and how many of them failed.
 *
 * # Safety
 * `r` must be a live report handle; `failed` may be NULL.
 */
uint32_t dnorm_report_checks(const struct DnormReport *r, uint32_t *failed);

/**
 * Releases a report. NULL is ignored.
 *
 * # Safety
 * `r` must come from [`dnorm_run`] and not be used afterwards.
 */
void dnorm_report_free(struct DnormReport *r);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void dnorm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DNORM_H */
