#ifndef LAGRAD_H
#define LAGRAD_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 1 to 3 match the exit codes of the command-line tool.
 */
typedef enum LagradStatus {
  LAGRAD_STATUS_OK = 0,
  /**
   * Invalid configuration, parse failure or bad argument.
   */
  LAGRAD_STATUS_VALIDATION = 1,
  /**
   * Rejected step, solver failure or violated invariant.
   */
  LAGRAD_STATUS_SIMULATION = 2,
  LAGRAD_STATUS_IO = 3,
  LAGRAD_STATUS_NULL_POINTER = 4,
  /**
   * Destination buffer shorter than the field.
   */
  LAGRAD_STATUS_BUFFER_TOO_SMALL = 5,
  LAGRAD_STATUS_PANIC = 6,
} LagradStatus;

typedef enum LagradField {
  /**
   * Specific volume, `n_cells` values.
   */
  LAGRAD_FIELD_V = 0,
  /**
   * Temperature, `n_cells` values.
   */
  LAGRAD_FIELD_THETA = 1,
  /**
   * Reactant mass fraction, `n_cells` values.
   */
  LAGRAD_FIELD_Z = 2,
  /**
   * Edge velocity, `n_cells + 1` values.
   */
  LAGRAD_FIELD_U = 3,
} LagradField;

/**
 * Opaque simulation handle.
 */
typedef struct LagradSim LagradSim;

/**
 * Integral diagnostics of the current state.
 */
typedef struct LagradDiagnostics {
  double t;
  double dt;
  double e_total;
  double u_entropy;
  double v_dissipation;
  double v_dissipation_accum;
  double z_l2;
  double z_diff_accum;
  double z_react_accum;
  double width;
  double min_v;
  double min_theta;
  double min_z;
  double max_z;
  double momentum;
} LagradDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from TOML text. `*out` is null on failure.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LagradStatus lagrad_sim_from_toml(const char *toml, struct LagradSim **out);

/**
 * Creates a simulation from a TOML file. `*out` is null on failure.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LagradStatus lagrad_sim_from_file(const char *path, struct LagradSim **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from a constructor above and not be used afterwards.
 */
void lagrad_sim_free(struct LagradSim *sim);

/**
 * Advances one accepted step. `dt_out` may be null.
 *
 * On failure the handle keeps the last valid state.
 *
 * # Safety
 * `sim` must be a live handle; `dt_out` null or valid.
 */
enum LagradStatus lagrad_sim_step(struct LagradSim *sim, double *dt_out);

/**
 * Steps until `t`, landing on it exactly. `t` is capped at the configured `t_end`.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum LagradStatus lagrad_sim_run_until(struct LagradSim *sim, double t);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum LagradStatus lagrad_sim_time(const struct LagradSim *sim, double *out);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum LagradStatus lagrad_sim_n_cells(const struct LagradSim *sim, size_t *out);

/**
 * Number of accepted steps so far.
 *
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum LagradStatus lagrad_sim_steps(const struct LagradSim *sim, size_t *out);

/**
 * Copies a field into `buf`, which must hold at least `len` doubles.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum LagradStatus lagrad_sim_copy_field(const struct LagradSim *sim,
                                        enum LagradField field,
                                        double *buf,
                                        size_t len);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum LagradStatus lagrad_sim_diagnostics(const struct LagradSim *sim,
                                         struct LagradDiagnostics *out);

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *lagrad_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lagrad_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAGRAD_H */
