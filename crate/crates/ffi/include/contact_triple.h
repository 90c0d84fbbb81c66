#ifndef CONTACT_TRIPLE_H
#define CONTACT_TRIPLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CtFormat {
  CT_FORMAT_CSV = 0,
  CT_FORMAT_JSON = 1,
} CtFormat;

typedef enum CtSide {
  CT_SIDE_HAMILTONIAN = 0,
  CT_SIDE_LAGRANGIAN = 1,
  CT_SIDE_HERGLOTZ = 2,
} CtSide;

typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_ARGUMENT = 2,
  CT_STATUS_CONFIG = 3,
  CT_STATUS_IO = 4,
  CT_STATUS_EXPRESSION = 5,
  CT_STATUS_DOMAIN = 6,
  CT_STATUS_CHART = 7,
  CT_STATUS_SINGULAR = 8,
  CT_STATUS_NO_CONVERGENCE = 9,
  CT_STATUS_STEP_UNDERFLOW = 10,
  CT_STATUS_DEGENERATE = 11,
  CT_STATUS_CHECK_FAILED = 12,
  CT_STATUS_PANIC = 13,
} CtStatus;

/**
 * Opaque scalar section (Hamiltonian, Lagrangian or Herglotz).
 */
typedef struct CtSection CtSection;

/**
 * Opaque integrated trajectory.
 */
typedef struct CtTrajectory CtTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *ct_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

/**
 * Builds a section from a JSON document of the form
 * `{"bundle": {...}, "side": "...", "<side>": {"builtin" | "expr": ..., "params": {...}}}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_section` a valid pointer.
 */
enum CtStatus ct_section_from_json(const char *json, struct CtSection **out_section);

/**
 * # Safety
 * `section` must come from [`ct_section_from_json`] and not be used again.
 */
void ct_section_free(struct CtSection *section);

/**
 * Base dimension `n`; sections take `2n + 1` arguments. Zero for null.
 *
 * # Safety
 * `section` must be null or a live handle.
 */
size_t ct_section_dim(const struct CtSection *section);

/**
 * # Safety
 * `section` must be a live handle and `out_side` a valid pointer.
 */
enum CtStatus ct_section_side(const struct CtSection *section, enum CtSide *out_side);

/**
 * Value and, if `out_grad` is non-null, gradient (length `nargs`) at the
 * charted point `args`.
 *
 * # Safety
 * `args` must hold `nargs` doubles and `out_grad` room for `nargs` doubles.
 */
enum CtStatus ct_section_eval(const struct CtSection *section,
                              size_t chart,
                              const double *args,
                              size_t nargs,
                              double *out_value,
                              double *out_grad);

/**
 * Contact Hamiltonian vector field at `(x, p, z)`; `x`, `p`, `out_xdot`
 * and `out_pdot` have the section's dimension.
 *
 * # Safety
 * All array pointers must be valid for `ct_section_dim(section)` doubles.
 */
enum CtStatus ct_contact_field(const struct CtSection *section,
                               size_t chart,
                               const double *x,
                               const double *p,
                               double z,
                               double *out_xdot,
                               double *out_pdot,
                               double *out_zdot);

/**
 * Integrates the scenario described by a JSON config (same schema as the
 * CLI's `run --config`). Nothing is written to disk.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_trajectory` valid.
 */
enum CtStatus ct_scenario_run(const char *json, struct CtTrajectory **out_trajectory);

/**
 * # Safety
 * `trajectory` must come from [`ct_scenario_run`] and not be used again.
 */
void ct_trajectory_free(struct CtTrajectory *trajectory);

/**
 * Number of samples; zero for null.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t ct_trajectory_len(const struct CtTrajectory *trajectory);

/**
 * Length of each sample's state vector, `2n + 1`; zero for null.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t ct_trajectory_width(const struct CtTrajectory *trajectory);

/**
 * Copies sample `index` into `out_s`, `out_chart` and `out_state` (room for
 * `ct_trajectory_width` doubles).
 *
 * # Safety
 * Pointers must be valid; `out_state` must hold the state width.
 */
enum CtStatus ct_trajectory_sample(const struct CtTrajectory *trajectory,
                                   size_t index,
                                   double *out_s,
                                   size_t *out_chart,
                                   double *out_state);

/**
 * Number of chart-switch events; zero for null.
 *
 * # Safety
 * `trajectory` must be null or a live handle.
 */
size_t ct_trajectory_event_count(const struct CtTrajectory *trajectory);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CtStatus ct_trajectory_event(const struct CtTrajectory *trajectory,
                                  size_t index,
                                  double *out_s,
                                  size_t *out_from,
                                  size_t *out_to);

/**
 * Writes the trajectory as CSV (plus `<name>.events.csv`) or JSON;
 * `format` is a [`CtFormat`] value.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum CtStatus ct_trajectory_write(const struct CtTrajectory *trajectory,
                                  const char *path,
                                  uint32_t format);

/**
 * Runs a verification suite (`all`, `diagrams`, `homogeneity`, `moebius`,
 * `legendre`). Returns [`CtStatus::CheckFailed`] with the report as the
 * error message if any check fails.
 *
 * # Safety
 * `suite` must be a NUL-terminated string.
 */
enum CtStatus ct_verify(const char *suite);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTACT_TRIPLE_H */
