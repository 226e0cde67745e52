#ifndef WSN_COVERAGE_H
#define WSN_COVERAGE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WsnStatus {
  WSN_STATUS_OK = 0,
  WSN_STATUS_NULL_POINTER = 1,
  WSN_STATUS_INVALID_ARGUMENT = 2,
  WSN_STATUS_CO_LOCATED = 3,
  WSN_STATUS_ALL_NODES_DEAD = 4,
  WSN_STATUS_UNKNOWN_NODE = 5,
  WSN_STATUS_BUFFER_TOO_SMALL = 6,
  WSN_STATUS_INTERNAL = 7,
} WsnStatus;

typedef enum WsnNodeState {
  WSN_NODE_STATE_ACTIVE = 0,
  WSN_NODE_STATE_SLEEPING = 1,
  WSN_NODE_STATE_IDLE = 2,
  WSN_NODE_STATE_DEAD = 3,
} WsnNodeState;

/**
 * Opaque simulation handle.
 */
typedef struct WsnSimulation WsnSimulation;

/**
 * Parameters of a simulation. Fill with [`wsn_sim_config_default`] and
 * adjust; `eps_prime <= 0` selects `eps / 2`.
 */
typedef struct WsnSimConfig {
  size_t count;
  double width;
  double height;
  double radius;
  uint64_t seed;
  double battery_low;
  double battery_high;
  double eps;
  size_t min_pts;
  double eps_prime;
  double theta;
  double battery_drain;
  size_t sleep_rounds;
  size_t grid_resolution;
  double weight_battery;
  double weight_neighbors;
  double weight_distance;
} WsnSimConfig;

typedef struct WsnRoundReport {
  size_t round;
  size_t deployed_count;
  size_t active_count;
  size_t cluster_count;
  size_t outlier_count;
  double ratio_r;
  double analytic_cr;
  double grid_cr;
} WsnRoundReport;

typedef struct WsnNodeInfo {
  size_t id;
  double x;
  double y;
  double battery;
  enum WsnNodeState state;
} WsnNodeInfo;

/**
 * One OPTICS output entry; undefined distances are NaN.
 */
typedef struct WsnOrderedPoint {
  size_t point_id;
  size_t order_index;
  double reachability;
  double core_distance;
} WsnOrderedPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *wsn_last_error_message(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *wsn_status_name(enum WsnStatus status);

/**
 * # Safety
 * `out` must be NULL or point to writable memory for one `WsnSimConfig`.
 */
enum WsnStatus wsn_sim_config_default(struct WsnSimConfig *out);

/**
 * Generates a deployment and wraps it in a new simulation handle.
 *
 * # Safety
 * `config` must point to a valid `WsnSimConfig`; `out` must be writable.
 * The handle written to `out` must be released with `wsn_simulation_free`.
 */
enum WsnStatus wsn_simulation_new(const struct WsnSimConfig *config, struct WsnSimulation **out);

/**
 * # Safety
 * `sim` must be NULL or a handle from `wsn_simulation_new` not yet freed.
 */
void wsn_simulation_free(struct WsnSimulation *sim);

/**
 * Runs one round and writes its report.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be NULL or writable.
 */
enum WsnStatus wsn_simulation_step(struct WsnSimulation *sim, struct WsnRoundReport *out);

/**
 * Number of deployed nodes, 0 for a NULL handle.
 *
 * # Safety
 * `sim` must be NULL or a live handle.
 */
size_t wsn_simulation_node_count(const struct WsnSimulation *sim);

/**
 * Number of completed rounds, 0 for a NULL handle.
 *
 * # Safety
 * `sim` must be NULL or a live handle.
 */
size_t wsn_simulation_round(const struct WsnSimulation *sim);

/**
 * Copies the ids active in the last round into `buf`. `out_len` always
 * receives the number of active nodes; if `cap` is smaller nothing is
 * copied and `BufferTooSmall` is returned.
 *
 * # Safety
 * `sim` must be a live handle, `buf` must have room for `cap` elements
 * (it may be NULL when `cap` is 0) and `out_len` must be writable.
 */
enum WsnStatus wsn_simulation_active_ids(const struct WsnSimulation *sim,
                                         size_t *buf,
                                         size_t cap,
                                         size_t *out_len);

/**
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum WsnStatus wsn_simulation_node(const struct WsnSimulation *sim,
                                   size_t id,
                                   struct WsnNodeInfo *out);

/**
 * OPTICS ordering of `n` points given as coordinate arrays. `out` must
 * have room for `n` entries, written in cluster order.
 *
 * # Safety
 * `xs` and `ys` must each point to `n` readable doubles, `out` to `n`
 * writable `WsnOrderedPoint`s.
 */
enum WsnStatus wsn_optics_order(const double *xs,
                                const double *ys,
                                size_t n,
                                double eps,
                                size_t min_pts,
                                struct WsnOrderedPoint *out);

/**
 * Acceptance level with the default weights.
 *
 * # Safety
 * `out` must be writable.
 */
enum WsnStatus wsn_acceptance_level(double battery, size_t neighbors, double distance, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum WsnStatus wsn_overlap_angle(double d, double r, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum WsnStatus wsn_non_overlapped_perimeter(double d, double r, double *out);

double wsn_analytic_cr(size_t active, double r, double area);

/**
 * Active percentage; NaN when `deployed` is 0.
 */
double wsn_active_ratio(size_t active, size_t deployed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSN_COVERAGE_H */
