#ifndef TTCNET_H
#define TTCNET_H

/* Generated by cbindgen from ttcnet-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call. Mirrors the command-line exit codes for the
 * shared cases.
 */
typedef enum TtcStatus {
  /**
   * Success; for verification, the candidate is in the core.
   */
  TTC_STATUS_OK = 0,
  /**
   * The candidate is blocked; the certificate names the coalition.
   */
  TTC_STATUS_BLOCKED = 1,
  /**
   * Input could not be parsed or violates an invariant.
   */
  TTC_STATUS_INVALID_INPUT = 2,
  /**
   * Enumeration refused: the search space exceeds the cap.
   */
  TTC_STATUS_REFUSED = 3,
  /**
   * A price property failed on the priced outcome.
   */
  TTC_STATUS_PROPERTY_FAILED = 4,
  /**
   * A required pointer argument was null.
   */
  TTC_STATUS_NULL_ARGUMENT = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  TTC_STATUS_INVALID_UTF8 = 6,
  /**
   * Unexpected internal failure.
   */
  TTC_STATUS_INTERNAL = 7,
} TtcStatus;

/**
 * Opaque parsed instance.
 */
typedef struct TtcInstance TtcInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Most recent diagnostic for this thread, or null. The caller owns the
 * returned string and must free it with [`ttc_string_free`].
 */
char *ttc_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *ttc_version(void);

/**
 * Releases a string allocated by this library. Null is ignored.
 *
 * # Safety
 * `s` must be a pointer previously returned by one of these functions and
 * not yet freed.
 */
void ttc_string_free(char *s);

/**
 * Parses an instance document into a handle. On success `*out` owns the
 * instance; release it with [`ttc_instance_free`].
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TtcStatus ttc_instance_parse(const char *json, struct TtcInstance **out);

/**
 * Releases an instance handle. Null is ignored.
 *
 * # Safety
 * `instance` must come from [`ttc_instance_parse`] and not be freed twice.
 */
void ttc_instance_free(struct TtcInstance *instance);

/**
 * Number of agents in the instance; 0 for a null handle.
 *
 * # Safety
 * `instance` must be a live handle or null.
 */
uintptr_t ttc_agent_count(const struct TtcInstance *instance);

/**
 * Solves the instance and writes the result document to `*out_json`
 * (assignments and stage count; the full trace when `include_trace`).
 *
 * # Safety
 * `instance` must be a live handle; `out_json` a valid pointer.
 */
enum TtcStatus ttc_solve(const struct TtcInstance *instance, bool include_trace, char **out_json);

/**
 * Checks a candidate result document against the instance. Returns
 * `TTC_STATUS_OK` when the candidate is in the core; `TTC_STATUS_BLOCKED`
 * with a certificate document in `*out_json` otherwise. `max_coalition < 0`
 * means unbounded.
 *
 * # Safety
 * `instance` must be a live handle; `candidate_json` a valid string;
 * `out_json` a valid pointer.
 */
enum TtcStatus ttc_verify(const struct TtcInstance *instance,
                          const char *candidate_json,
                          int64_t max_coalition,
                          char **out_json);

/**
 * Solves a network instance, prices the outcome, verifies the price
 * properties, and writes the result document (with the prices section) to
 * `*out_json`. Returns `TTC_STATUS_PROPERTY_FAILED` when any check fails;
 * the document is still written.
 *
 * # Safety
 * `instance` must be a live handle; `out_json` a valid pointer.
 */
enum TtcStatus ttc_prices(const struct TtcInstance *instance, char **out_json);

/**
 * Exhaustively enumerates the core of a network instance (balanced mode
 * when `balanced_only`, every feasible network otherwise) and writes a
 * document listing the members. Refuses with `TTC_STATUS_REFUSED` when the
 * raw candidate count exceeds `max_candidates`.
 *
 * # Safety
 * `instance` must be a live handle; `out_json` a valid pointer.
 */
enum TtcStatus ttc_enumerate_core(const struct TtcInstance *instance,
                                  bool balanced_only,
                                  uint64_t max_candidates,
                                  char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TTCNET_H */
