#ifndef SCLERA_SIM_H
#define SCLERA_SIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

#define SS_MODE_ACTIVE 0

#define SS_MODE_PASSIVE 1

#define SS_SKILL_EXPERT 0

#define SS_SKILL_INTERMEDIATE 1

#define SS_SKILL_NOVICE 2

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_CONFIG = 2,
  SS_STATUS_INVALID_ARGUMENT = 3,
  SS_STATUS_SIMULATION_DIVERGED = 4,
  SS_STATUS_IO = 5,
  SS_STATUS_OUT_OF_RANGE = 6,
  SS_STATUS_PANIC = 7,
} SsStatus;

/**
 * Resolved scenario. Opaque.
 */
typedef struct SsScenario SsScenario;

/**
 * Completed trial log. Opaque.
 */
typedef struct SsTrial SsTrial;

/**
 * One logged step. `mode` is 0 for impedance, 1 for adaptive; `alarm` runs
 * 0 (none) to 3 (high).
 */
typedef struct SsSample {
  double t;
  double fsx;
  double fsy;
  double fs;
  int32_t mode;
  int32_t alarm;
  double progress;
  double dx;
  double dy;
  double twist[6];
} SsSample;

typedef struct SsMetrics {
  double total_time;
  double time_over_unsafe;
  double mean_force;
  double max_probable_force;
  size_t n_switches;
  bool completed;
} SsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default scenario for a mode and skill preset.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum SsStatus ss_scenario_default(int32_t mode,
                                  int32_t skill,
                                  uint64_t seed,
                                  struct SsScenario **out);

/**
 * Scenario from TOML text. Missing keys take their defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_scenario_from_toml(const char *toml, struct SsScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be freed.
 */
enum SsStatus ss_scenario_set_seed(struct SsScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must come from this library and not be freed.
 */
enum SsStatus ss_scenario_set_mode(struct SsScenario *scenario, int32_t mode);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must be null or come from this library, freed at most once.
 */
void ss_scenario_free(struct SsScenario *scenario);

/**
 * Runs one trial. On divergence returns `SimulationDiverged` and writes no
 * handle.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_run_trial(const struct SsScenario *scenario, struct SsTrial **out);

/**
 * # Safety
 * `trial` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_trial_sample_count(const struct SsTrial *trial, size_t *out);

/**
 * # Safety
 * `trial` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_trial_sample(const struct SsTrial *trial, size_t index, struct SsSample *out);

/**
 * # Safety
 * `trial` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_trial_metrics(const struct SsTrial *trial, struct SsMetrics *out);

/**
 * Writes the sample log as CSV.
 *
 * # Safety
 * `trial` must be a live handle; `path` a NUL-terminated string.
 */
enum SsStatus ss_trial_write_csv(const struct SsTrial *trial, const char *path);

/**
 * Releases a trial. Null is ignored.
 *
 * # Safety
 * `trial` must be null or come from this library, freed at most once.
 */
void ss_trial_free(struct SsTrial *trial);

/**
 * Single-axis adaptive loop against a spring of stiffness `k` (mN/mm)
 * starting at `initial_force`, tracking constant `desired_force`. Writes
 * F_e − F_d at `duration`.
 *
 * # Safety
 * `out_final_error` must be writable.
 */
enum SsStatus ss_oracle_1dof(double k,
                             double initial_force,
                             double desired_force,
                             double duration,
                             double dt,
                             double *out_final_error);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version, static NUL-terminated string.
 */
const char *ss_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCLERA_SIM_H */
