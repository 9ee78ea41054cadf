#ifndef GROUPOID_AVG_H
#define GROUPOID_AVG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. 2 to 4 match the command-line exit codes.
 */
enum GaStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  GA_STATUS_OK = 0,
  GA_STATUS_VALIDATION = 2,
  GA_STATUS_GATE_REFUSED = 3,
  GA_STATUS_CERTIFICATE = 4,
  GA_STATUS_NULL_POINTER = 10,
  GA_STATUS_PARSE = 11,
  GA_STATUS_NUMERIC = 12,
  GA_STATUS_PANIC = 13,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum GaStatus GaStatus;
#else
typedef int32_t GaStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Values accepted as the `mode` of [`ga_cohomology`].
 */
enum GaCohomologyMode
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  GA_COHOMOLOGY_MODE_CONTRACT2_VERIFY = 0,
  GA_COHOMOLOGY_MODE_CONTRACT1_VERIFY = 1,
  GA_COHOMOLOGY_MODE_DEFECT_CONSISTENCY = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum GaCohomologyMode GaCohomologyMode;
#else
typedef int32_t GaCohomologyMode;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * A validated finite groupoid.
 */
typedef struct GaGroupoid GaGroupoid;

/**
 * The outcome of an averaging run.
 */
typedef struct GaRun GaRun;

/**
 * A resolved scenario: groupoid, Haar data, metric and pseudo-representation.
 */
typedef struct GaScenario GaScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next `ga_*` call on the same thread.
 */
const char *ga_last_error(void);

void ga_string_free(char *s);

/**
 * Builds a groupoid from a generator such as `{"kind": "pair", "n": 3}`.
 */
GaStatus ga_groupoid_generate(const char *generator_json, struct GaGroupoid **out);

/**
 * Parses and validates a groupoid file.
 */
GaStatus ga_groupoid_from_json(const char *json, struct GaGroupoid **out);

GaStatus ga_groupoid_counts(const struct GaGroupoid *g, size_t *n_objects, size_t *n_arrows);

/**
 * The groupoid in its JSON file format.
 */
GaStatus ga_groupoid_to_json(const struct GaGroupoid *g, char **out);

void ga_groupoid_free(struct GaGroupoid *g);

/**
 * Parses and resolves a scenario. Relative file references are resolved
 * against `base_dir`, or the working directory when it is null.
 */
GaStatus ga_scenario_from_json(const char *json, const char *base_dir, struct GaScenario **out);

GaStatus ga_scenario_load(const char *path, struct GaScenario **out);

void ga_scenario_free(struct GaScenario *s);

/**
 * Runs the averaging iteration. A run handle is produced whenever the
 * status is `GA_STATUS_OK`, `GA_STATUS_GATE_REFUSED` or `GA_STATUS_CERTIFICATE`; the status is
 * the run's verdict.
 */
GaStatus ga_avg(const struct GaScenario *s, struct GaRun **out);

GaStatus ga_run_report_json(const struct GaRun *run, char **out);

/**
 * Trace CSV; header only for refused runs.
 */
GaStatus ga_run_trace_csv(const struct GaRun *run, char **out);

/**
 * `b` and `r` of the final iterate (of the input, for refused runs).
 */
GaStatus ga_run_final_defects(const struct GaRun *run, double *b, double *r);

/**
 * Row-major entries of the final iterate at arrow `arrow`. `len` must be at
 * least `rows·cols`; the shape is written to `rows` and `cols`.
 */
GaStatus ga_run_limit_map(const struct GaRun *run,
                          size_t arrow,
                          double *data,
                          size_t len,
                          size_t *rows,
                          size_t *cols);

void ga_run_free(struct GaRun *run);

/**
 * Verifies a contraction identity; `mode` is a `GaCohomologyMode` value.
 * Writes the JSON report. The status is `GA_STATUS_CERTIFICATE` when the identity
 * fails.
 */
GaStatus ga_cohomology(const struct GaScenario *s, int32_t mode, uint64_t seed, char **report_json);

/**
 * Averages the scenario metric along its pseudo-representation; writes the
 * JSON report.
 */
GaStatus ga_metric(const struct GaScenario *s, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GROUPOID_AVG_H */
