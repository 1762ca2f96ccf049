/* SPDX-License-Identifier: Apache-2.0 */

#ifndef RTLSYM_H
#define RTLSYM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RtlsymStatus {
  RTLSYM_STATUS_OK = 0,
  RTLSYM_STATUS_NULL_ARGUMENT = 1,
  RTLSYM_STATUS_INVALID_UTF8 = 2,
  RTLSYM_STATUS_IO = 3,
  RTLSYM_STATUS_SYNTAX = 4,
  RTLSYM_STATUS_ELABORATION = 5,
  RTLSYM_STATUS_HARNESS = 6,
  RTLSYM_STATUS_EXECUTION = 7,
  RTLSYM_STATUS_REPLAY = 8,
  RTLSYM_STATUS_COVERAGE = 9,
  RTLSYM_STATUS_PANIC = 10,
} RtlsymStatus;

/**
 * Merged coverage counters of a replayed suite.
 */
typedef struct RtlsymCoverage RtlsymCoverage;

/**
 * Elaborated design.
 */
typedef struct RtlsymDesign RtlsymDesign;

/**
 * Harness resolved against a design.
 */
typedef struct RtlsymPlan RtlsymPlan;

/**
 * Generated or parsed test suite.
 */
typedef struct RtlsymSuite RtlsymSuite;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rtlsym_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void rtlsym_string_free(char *s);

/**
 * Parses and elaborates the Verilog file at `path`.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum RtlsymStatus rtlsym_design_load(const char *path, struct RtlsymDesign **out);

/**
 * Parses and elaborates `source`; `file` names it in diagnostics.
 *
 * # Safety
 * `file` and `source` are NUL-terminated strings; `out` is writable.
 */
enum RtlsymStatus rtlsym_design_from_source(const char *file,
                                            const char *source,
                                            struct RtlsymDesign **out);

/**
 * # Safety
 * `d` is null or a live design handle.
 */
void rtlsym_design_free(struct RtlsymDesign *d);

/**
 * Resolves harness text against a design. `max_cycles` overrides the
 * harness bound when non-zero.
 *
 * # Safety
 * `design` is a live handle; `harness` is a NUL-terminated string; `out`
 * is writable.
 */
enum RtlsymStatus rtlsym_plan_from_text(const struct RtlsymDesign *design,
                                        const char *harness,
                                        uint32_t max_cycles,
                                        struct RtlsymPlan **out);

/**
 * # Safety
 * `p` is null or a live plan handle.
 */
void rtlsym_plan_free(struct RtlsymPlan *p);

/**
 * Generates a suite with the built-in solver. Output does not depend on
 * `jobs`.
 *
 * # Safety
 * `design` and `plan` are live handles, the plan resolved against this
 * design; `out` is writable.
 */
enum RtlsymStatus rtlsym_testgen(const struct RtlsymDesign *design,
                                 const struct RtlsymPlan *plan,
                                 uint32_t jobs,
                                 struct RtlsymSuite **out);

/**
 * Parses suite text written by [`rtlsym_suite_to_text`] or the CLI.
 *
 * # Safety
 * `design` is a live handle; `suite` is a NUL-terminated string; `out` is
 * writable.
 */
enum RtlsymStatus rtlsym_suite_from_text(const struct RtlsymDesign *design,
                                         const char *suite,
                                         struct RtlsymSuite **out);

/**
 * Serializes a suite; release the result with [`rtlsym_string_free`].
 *
 * # Safety
 * `design` and `suite` are live handles; `out` is writable.
 */
enum RtlsymStatus rtlsym_suite_to_text(const struct RtlsymDesign *design,
                                       const struct RtlsymSuite *suite,
                                       char **out);

/**
 * Number of tests in a suite; 0 for a null handle.
 *
 * # Safety
 * `suite` is null or a live handle.
 */
uint64_t rtlsym_suite_tests(const struct RtlsymSuite *suite);

/**
 * Number of input vectors over all tests; 0 for a null handle.
 *
 * # Safety
 * `suite` is null or a live handle.
 */
uint64_t rtlsym_suite_vectors(const struct RtlsymSuite *suite);

/**
 * # Safety
 * `s` is null or a live suite handle.
 */
void rtlsym_suite_free(struct RtlsymSuite *s);

/**
 * Replays every test, checks recorded branch traces and merges coverage.
 *
 * # Safety
 * All handles are live and belong to the same design; `out` is writable.
 */
enum RtlsymStatus rtlsym_simulate(const struct RtlsymDesign *design,
                                  const struct RtlsymPlan *plan,
                                  const struct RtlsymSuite *suite,
                                  uint32_t jobs,
                                  struct RtlsymCoverage **out);

/**
 * Statement and branch-arm coverage in tenths of a percent.
 *
 * # Safety
 * `design` and `coverage` are live handles; the outputs are writable.
 */
enum RtlsymStatus rtlsym_coverage_percent(const struct RtlsymDesign *design,
                                          const struct RtlsymCoverage *coverage,
                                          uint32_t *stmt_tenths,
                                          uint32_t *branch_tenths);

/**
 * Text coverage report; release the result with [`rtlsym_string_free`].
 *
 * # Safety
 * `design` and `coverage` are live handles; `out` is writable.
 */
enum RtlsymStatus rtlsym_coverage_report(const struct RtlsymDesign *design,
                                         const struct RtlsymCoverage *coverage,
                                         char **out);

/**
 * Coverage counters as JSON; release the result with
 * [`rtlsym_string_free`].
 *
 * # Safety
 * `coverage` is a live handle; `out` is writable.
 */
enum RtlsymStatus rtlsym_coverage_to_json(const struct RtlsymCoverage *coverage, char **out);

/**
 * # Safety
 * `c` is null or a live coverage handle.
 */
void rtlsym_coverage_free(struct RtlsymCoverage *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RTLSYM_H */
