#ifndef ASV_APF_H
#define ASV_APF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status returned by every fallible call.
 */
typedef enum AsvStatus {
  ASV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ASV_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad JSON, invalid UTF-8, failed validation.
   */
  ASV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The simulation itself failed, for example a diverged state.
   */
  ASV_STATUS_SIMULATION = 3,
  /**
   * A file could not be read.
   */
  ASV_STATUS_IO = 4,
  /**
   * An index was out of range.
   */
  ASV_STATUS_OUT_OF_RANGE = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  ASV_STATUS_PANIC = 6,
} AsvStatus;

typedef enum AsvMethod {
  ASV_METHOD_MVORTEX = 0,
  ASV_METHOD_SINKVORTEX = 1,
  ASV_METHOD_INVERSE = 2,
  ASV_METHOD_VO = 3,
} AsvMethod;

typedef enum AsvOutcome {
  ASV_OUTCOME_SUCCESS = 0,
  ASV_OUTCOME_COLLISION = 1,
  ASV_OUTCOME_TIMEOUT = 2,
} AsvOutcome;

/**
 * Completed simulation.
 */
typedef struct AsvResult AsvResult;

/**
 * Parsed, validated scenario.
 */
typedef struct AsvScenario AsvScenario;

/**
 * Per-agent summary. Missing optional metrics are NaN.
 */
typedef struct AsvAgentSummary {
  uint32_t id;
  enum AsvMethod method;
  enum AsvOutcome outcome;
  double end_time;
  double ce;
  double mcte;
  double time_to_goal;
  double min_separation;
  double min_clearance;
  double max_vortex;
} AsvAgentSummary;

/**
 * One trajectory sample. `mode` is 0 for ILOS, 1 for reactive.
 */
typedef struct AsvSample {
  double t;
  double x;
  double y;
  double psi;
  double u;
  double v;
  double r;
  double delta;
  double delta_c;
  double psi_d;
  double y_e;
  uint8_t mode;
} AsvSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *asv_version(void);

/**
 * Message of the last failed call on this thread, or null if the last call
 * succeeded. Valid until the next call into the library on this thread.
 */
const char *asv_last_error(void);

/**
 * Parses and validates a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AsvStatus asv_scenario_from_json(const char *json, struct AsvScenario **out);

/**
 * Loads and validates a scenario file. A relative ship coefficient file is
 * resolved against the scenario's directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum AsvStatus asv_scenario_from_file(const char *path, struct AsvScenario **out);

/**
 * Overrides the method of every agent.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum AsvStatus asv_scenario_set_method(struct AsvScenario *scenario, enum AsvMethod method);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void asv_scenario_free(struct AsvScenario *scenario);

/**
 * Runs a scenario to completion.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum AsvStatus asv_simulate(const struct AsvScenario *scenario, struct AsvResult **out);

/**
 * Releases a result. Null is ignored.
 *
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void asv_result_free(struct AsvResult *result);

/**
 * Outcome of the own ship (the agent with the lowest id).
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum AsvStatus asv_result_outcome(const struct AsvResult *result, enum AsvOutcome *out);

/**
 * Number of agents, ordered by id.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum AsvStatus asv_result_agent_count(const struct AsvResult *result, size_t *out);

/**
 * Summary of the agent at `index`.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum AsvStatus asv_result_agent(const struct AsvResult *result,
                                size_t index,
                                struct AsvAgentSummary *out);

/**
 * Copies up to `capacity` samples of the agent at `index` into `buf` and
 * stores the total sample count in `total`. Pass a null `buf` with zero
 * capacity to query the count.
 *
 * # Safety
 * `result` must be a live handle; `buf` must hold `capacity` elements;
 * `total` must be writable.
 */
enum AsvStatus asv_result_samples(const struct AsvResult *result,
                                  size_t index,
                                  struct AsvSample *buf,
                                  size_t capacity,
                                  size_t *total);

/**
 * Result document as JSON. Free with `asv_string_free`.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum AsvStatus asv_result_to_json(const struct AsvResult *result, char **out);

/**
 * Runs a Monte Carlo batch on benchmark environment `env` (1 to 5) and
 * returns the summary as JSON. `jobs` of 0 uses every core. Free with
 * `asv_string_free`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AsvStatus asv_batch_json(uint8_t env,
                              enum AsvMethod method,
                              size_t runs,
                              uint64_t seed,
                              size_t jobs,
                              char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void asv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASV_APF_H */
