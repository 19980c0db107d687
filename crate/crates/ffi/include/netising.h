#ifndef NETISING_H
#define NETISING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  NETISING_STATUS_OK = 0,
  /**
   * A parameter or configuration value is out of range.
   */
  NETISING_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The data cannot support the computation, e.g. an empty arm.
   */
  NETISING_STATUS_DATA = 3,
  NETISING_STATUS_NUMERICAL = 4,
  NETISING_STATUS_NULL_POINTER = 5,
  NETISING_STATUS_PANIC = 6,
} NetisingStatus;

/**
 * Undirected interaction graph.
 */
typedef struct NetisingGraph NetisingGraph;

/**
 * Exact Curie–Weiss sampler with its own random stream.
 */
typedef struct NetisingSampler NetisingSampler;

/**
 * Pseudo-likelihood estimate of `β`.
 */
typedef struct {
  double beta_hat;
  double beta_unrestricted;
  bool at_boundary;
  /**
   * NaN when the closed form is undefined.
   */
  double closed_form;
} NetisingMple;

/**
 * Feasible prediction interval and its ingredients.
 */
typedef struct {
  double tau_hat;
  double lo;
  double hi;
  double beta_hat;
  double khat;
  /**
   * No grid point survived the first step; the full grid was used.
   */
  bool fallback;
  bool sparse_warning;
} NetisingInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *netising_last_error(void);

/**
 * Creates a sampler for `n` units with interaction `beta` and field `h`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
NetisingStatus netising_sampler_new(size_t n,
                                    double beta,
                                    double h,
                                    uint64_t seed,
                                    NetisingSampler **out);

/**
 * Draws one assignment into `treatments` (0 or 1 per unit, length `n`).
 *
 * # Safety
 * `sampler` must come from [`netising_sampler_new`]; `treatments` must
 * point to `len` writable bytes.
 */
NetisingStatus netising_sampler_draw(NetisingSampler *sampler, uint8_t *treatments, size_t len);

/**
 * # Safety
 * `sampler` must come from [`netising_sampler_new`] or be null.
 */
void netising_sampler_free(NetisingSampler *sampler);

/**
 * Builds a graph on `n` units from `num_edges` pairs stored as
 * `edges[2k], edges[2k + 1]`.
 *
 * # Safety
 * `edges` must point to `2 * num_edges` values; `out` must be writable.
 */
NetisingStatus netising_graph_from_edges(size_t n,
                                         const size_t *edges,
                                         size_t num_edges,
                                         NetisingGraph **out);

/**
 * Samples a graph with edge probability `min(1, rho * g)` for a constant
 * kernel value `g`.
 *
 * # Safety
 * `out` must be writable.
 */
NetisingStatus netising_graph_generate(size_t n,
                                       double rho,
                                       double g,
                                       uint64_t seed,
                                       NetisingGraph **out);

/**
 * Number of units and edges.
 *
 * # Safety
 * `graph` must be a live handle; outputs must be writable.
 */
NetisingStatus netising_graph_size(const NetisingGraph *graph, size_t *n, size_t *num_edges);

/**
 * # Safety
 * `graph` must come from this library or be null.
 */
void netising_graph_free(NetisingGraph *graph);

/**
 * Quantile of `W_c`.
 *
 * # Safety
 * `out` must be writable.
 */
NetisingStatus netising_wc_quantile(double c, double p, double *out);

/**
 * Quantile of the uniform law `H_n(·; κ₁, κ₂, √n(1 − β))`.
 *
 * # Safety
 * `out` must be writable.
 */
NetisingStatus netising_hn_quantile(double p,
                                    double kappa1,
                                    double kappa2,
                                    size_t n,
                                    double beta,
                                    double *out);

/**
 * Quantile of the pseudo-likelihood limit law at drift `c`.
 *
 * # Safety
 * `out` must be writable.
 */
NetisingStatus netising_mple_limit_quantile(double p, double c, size_t n, double *out);

/**
 * Difference of arm means.
 *
 * # Safety
 * `treatments` and `outcomes` must point to `n` values; `out` must be
 * writable.
 */
NetisingStatus netising_hajek(const uint8_t *treatments,
                              const double *outcomes,
                              size_t n,
                              double *out);

/**
 * # Safety
 * `treatments` must point to `n` values; `out` must be writable.
 */
NetisingStatus netising_mple(const uint8_t *treatments, size_t n, NetisingMple *out);

/**
 * Learner, resampling bound and two-step interval for observed data on
 * `graph`, with `grid_points` equally spaced values of `β`.
 *
 * # Safety
 * `graph` must be a live handle on `n` units; `treatments` and
 * `outcomes` must point to `n` values; `out` must be writable.
 */
NetisingStatus netising_feasible_interval(const NetisingGraph *graph,
                                          const uint8_t *treatments,
                                          const double *outcomes,
                                          size_t n,
                                          double alpha1,
                                          double alpha2,
                                          size_t grid_points,
                                          uint64_t seed,
                                          NetisingInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETISING_H */
