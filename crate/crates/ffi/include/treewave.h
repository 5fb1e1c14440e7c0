#ifndef TREEWAVE_H
#define TREEWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwStatus {
  TW_STATUS_OK = 0,
  TW_STATUS_NULL_POINTER = 1,
  TW_STATUS_INVALID_ARGUMENT = 2,
  TW_STATUS_TRUNCATION = 3,
  TW_STATUS_DOMAIN = 4,
  TW_STATUS_MODE = 5,
  TW_STATUS_PARSE = 6,
  TW_STATUS_IO = 7,
  TW_STATUS_INTERNAL = 8,
} TwStatus;

/**
 * A solved trajectory `u(n)` for `|n| ≤ steps`.
 */
typedef struct TwTrajectory TwTrajectory;

/**
 * Energies at one time step, as doubles.
 */
typedef struct TwEnergy {
  double kinetic;
  double potential;
  double total;
  double gap;
} TwEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library and valid until the next failing call on the same thread.
 */
const char *tw_last_error_message(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void tw_string_free(char *s);

/**
 * Solves for `|n| ≤ steps` on `T_q`.
 *
 * `mode` is `exact` or `float`, `solver` is `closed` or `recurrence` and
 * `initial` is `delta-f`, `delta-g`, `random[:R]` or a JSON object. A
 * `truncation_radius` of 0 picks `steps + data radius + 2`.
 *
 * # Safety
 * String arguments must be nul-terminated; `out` must be writable.
 */
enum TwStatus tw_trajectory_solve(uint32_t q,
                                  uint32_t steps,
                                  const char *mode,
                                  const char *solver,
                                  const char *initial,
                                  uint64_t seed,
                                  uint32_t truncation_radius,
                                  struct TwTrajectory **out);

/**
 * # Safety
 * `t` must come from [`tw_trajectory_solve`] and not have been freed. Null is ignored.
 */
void tw_trajectory_free(struct TwTrajectory *t);

/**
 * Branching number and the solved time range `[lo, hi]`.
 *
 * # Safety
 * `t` must be a live handle; output pointers must be writable.
 */
enum TwStatus tw_trajectory_info(const struct TwTrajectory *t,
                                 uint32_t *q,
                                 int64_t *lo,
                                 int64_t *hi);

/**
 * `u(n)` at a vertex given as comma-separated labels (`""` is the origin).
 *
 * # Safety
 * `t` must be a live handle, `vertex` nul-terminated and `out` writable.
 */
enum TwStatus tw_trajectory_value(const struct TwTrajectory *t,
                                  int64_t n,
                                  const char *vertex,
                                  double *out);

/**
 * Exact `u(n)(x) = a + b√q` as two fraction strings. `Mode` for float trajectories.
 *
 * # Safety
 * As [`tw_trajectory_value`]; free both strings with [`tw_string_free`].
 */
enum TwStatus tw_trajectory_value_exact(const struct TwTrajectory *t,
                                        int64_t n,
                                        const char *vertex,
                                        char **a_out,
                                        char **b_out);

/**
 * Kinetic, potential and total energy and their difference at step `n`.
 * Needs `n ± 1` inside the solved range.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum TwStatus tw_trajectory_energy(const struct TwTrajectory *t, int64_t n, struct TwEnergy *out);

/**
 * Snapshot `u(n)` as JSON (`{"q", "entries": [{"vertex", "value"}]}`).
 *
 * # Safety
 * `t` must be a live handle and `out` writable; free with [`tw_string_free`].
 */
enum TwStatus tw_trajectory_snapshot_json(const struct TwTrajectory *t, int64_t n, char **out);

/**
 * Runs the seeded property suite for one `q`; `failed` receives the number of failed checks.
 *
 * # Safety
 * `failed` must be writable.
 */
enum TwStatus tw_verify(uint32_t q, uint64_t seed, uint32_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREEWAVE_H */
