#ifndef CONFLUENCE_H
#define CONFLUENCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum cfl_status {
  CFL_STATUS_OK = 0,
  CFL_STATUS_NULL_POINTER = 1,
  CFL_STATUS_INVALID_UTF8 = 2,
  CFL_STATUS_UNKNOWN_KEY = 3,
  CFL_STATUS_INVALID_CONFIG = 4,
  CFL_STATUS_NUMERICAL_FAILURE = 5,
  CFL_STATUS_IO = 6,
  // The requested quantity does not exist for this run (no dip, no
  // confluence, index out of range).
  CFL_STATUS_NOT_AVAILABLE = 7,
  CFL_STATUS_PANIC = 8,
} cfl_status;

// Opaque config handle: an optional config file plus `key=value`
// overrides, resolved when a run is started.
typedef struct cfl_config cfl_config;

// Opaque handle to a finished run.
typedef struct cfl_run cfl_run;

typedef struct cfl_dip_report {
  double r_min;
  double t_min;
  double sigma_min;
  double amplitude;
  double onset_time;
  // NaN when the half-amplitude width could not be measured.
  double width;
} cfl_dip_report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *cfl_last_error_message(void);

// New config holding the defaults.
struct cfl_config *cfl_config_new(void);

// # Safety
// `cfg` must be NULL or a handle from `cfl_config_new` not yet freed.
void cfl_config_free(struct cfl_config *cfg);

// Reads base values from a TOML config or a `run_meta.json`.
//
// # Safety
// `cfg` must be a live handle and `path` a NUL-terminated string.
enum cfl_status cfl_config_load_file(struct cfl_config *cfg, const char *path);

// Sets one key. `value` uses config file syntax (`0.01`, `"neumann"`,
// `[1.2, 1.4]`); bare words are taken as strings. Cross-field checks
// run when the config is validated or a run starts.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum cfl_status cfl_config_set(struct cfl_config *cfg, const char *key, const char *value);

// Resolves and validates the config without running it.
//
// # Safety
// `cfg` must be a live handle.
enum cfl_status cfl_config_validate(const struct cfl_config *cfg);

// Runs the simulation to completion or divergence. A diverged run is
// still returned with `CFL_STATUS_OK`; query it with `cfl_run_diverged`.
//
// # Safety
// `cfg` must be a live config handle and `out` a valid pointer.
enum cfl_status cfl_run_new(const struct cfl_config *cfg, struct cfl_run **out);

// # Safety
// `run` must be NULL or a handle from `cfl_run_new` not yet freed.
void cfl_run_free(struct cfl_run *run);

// 1 if the run stopped early, 0 if it completed, -1 for a NULL handle.
//
// # Safety
// `run` must be NULL or a live handle.
int32_t cfl_run_diverged(const struct cfl_run *run);

// Number of recorded time levels, including t = 0. Zero for NULL.
//
// # Safety
// `run` must be NULL or a live handle.
size_t cfl_run_n_levels(const struct cfl_run *run);

// Steps on which the order function system was not diagonally dominant.
//
// # Safety
// `run` must be NULL or a live handle.
size_t cfl_run_dominance_lost_steps(const struct cfl_run *run);

// # Safety
// `run` must be a live handle and `out` a valid pointer.
enum cfl_status cfl_run_dip(const struct cfl_run *run, struct cfl_dip_report *out);

// # Safety
// `run` must be a live handle and `out` a valid pointer.
enum cfl_status cfl_run_confluence_time(const struct cfl_run *run, double *out);

// Boundary positions at level `index`; a boundary that no longer
// exists is reported as NaN.
//
// # Safety
// `run` must be a live handle; `t`, `r1`, `r2` valid pointers.
enum cfl_status cfl_run_boundary_track(const struct cfl_run *run,
                                       size_t index,
                                       double *t,
                                       double *r1,
                                       double *r2);

// Writes the CSV and JSON outputs of the run into `dir`.
//
// # Safety
// `run` must be a live handle and `dir` a NUL-terminated string.
enum cfl_status cfl_run_write_outputs(const struct cfl_run *run, const char *dir);

// Closed-form temperature jump `−(r1 v1 − r2 v2)/2` at confluence.
double cfl_analytic_jump(double r1, double v1, double r2, double v2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFLUENCE_H */
