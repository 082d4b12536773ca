#ifndef PPRLS_H
#define PPRLS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum PprlsStatus {
  PPRLS_STATUS_OK = 0,
  PPRLS_STATUS_INVALID_ARGUMENT = 1,
  PPRLS_STATUS_NULL_POINTER = 2,
  PPRLS_STATUS_DISCONNECTED = 3,
  PPRLS_STATUS_NO_CLUSTER = 4,
  PPRLS_STATUS_NUMERIC = 5,
  PPRLS_STATUS_BUFFER_TOO_SMALL = 6,
  PPRLS_STATUS_PANIC = 7,
} PprlsStatus;

/**
 * A sweep-cut cluster.
 */
typedef struct PprlsCluster PprlsCluster;

/**
 * An r-neighborhood graph.
 */
typedef struct PprlsGraph PprlsGraph;

/**
 * A PPR vector.
 */
typedef struct PprlsPpr PprlsPpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pprls_last_error_message(void);

/**
 * Builds the r-neighborhood graph of `n` points of dimension `dim` stored row-major in `coords`.
 *
 * # Safety
 * `coords` must point to `n * dim` doubles; `out` must be writable.
 */
enum PprlsStatus pprls_graph_from_points(const double *coords,
                                         size_t n,
                                         size_t dim,
                                         double radius,
                                         struct PprlsGraph **out);

/**
 * Builds a graph on `n` vertices from `m` undirected edges stored as pairs in `edges`.
 *
 * # Safety
 * `edges` must point to `2 * m` values; `out` must be writable.
 */
enum PprlsStatus pprls_graph_from_edges(size_t n,
                                        const size_t *edges,
                                        size_t m,
                                        struct PprlsGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from a `pprls_graph_*` constructor and not be used afterwards.
 */
void pprls_graph_free(struct PprlsGraph *g);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t pprls_graph_num_vertices(const struct PprlsGraph *g);

/**
 * Number of undirected edges, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t pprls_graph_num_edges(const struct PprlsGraph *g);

/**
 * Writes the degrees of all vertices into `buf`, which must hold `len >= n` entries.
 *
 * # Safety
 * `g` must be a live graph handle and `buf` writable for `len` values.
 */
enum PprlsStatus pprls_graph_degrees(const struct PprlsGraph *g, size_t *buf, size_t len);

/**
 * Smallest radius for which the points form a connected graph.
 *
 * # Safety
 * `coords` must point to `n * dim` doubles; `out` must be writable.
 */
enum PprlsStatus pprls_smallest_connecting_radius(const double *coords,
                                                  size_t n,
                                                  size_t dim,
                                                  double *out);

/**
 * Normalized cut of the vertex set listed in `members`.
 *
 * # Safety
 * `g` must be a live graph handle, `members` must hold `k` values, `out` must be writable.
 */
enum PprlsStatus pprls_normalized_cut(const struct PprlsGraph *g,
                                      const size_t *members,
                                      size_t k,
                                      double *out);

/**
 * Exact PPR vector of seed `v`.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum PprlsStatus pprls_ppr_exact(const struct PprlsGraph *g,
                                 size_t v,
                                 double alpha,
                                 double tol,
                                 struct PprlsPpr **out);

/**
 * ε-approximate PPR vector of seed `v` by the push procedure.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum PprlsStatus pprls_ppr_push(const struct PprlsGraph *g,
                                size_t v,
                                double alpha,
                                double epsilon,
                                struct PprlsPpr **out);

/**
 * Length of a PPR vector, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live PPR handle.
 */
size_t pprls_ppr_len(const struct PprlsPpr *p);

/**
 * Copies the PPR values into `buf`, which must hold at least `pprls_ppr_len` entries.
 *
 * # Safety
 * `p` must be a live PPR handle and `buf` writable for `len` values.
 */
enum PprlsStatus pprls_ppr_values(const struct PprlsPpr *p, double *buf, size_t len);

/**
 * Releases a PPR vector. Null is ignored.
 *
 * # Safety
 * `p` must come from a `pprls_ppr_*` constructor and not be used afterwards.
 */
void pprls_ppr_free(struct PprlsPpr *p);

/**
 * Exact PPR from seed `v` followed by the normalized sweep over (lower, upper).
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum PprlsStatus pprls_cluster(const struct PprlsGraph *g,
                               size_t v,
                               double alpha,
                               double lower,
                               double upper,
                               struct PprlsCluster **out);

/**
 * Number of members of a cluster, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live cluster handle.
 */
size_t pprls_cluster_size(const struct PprlsCluster *c);

/**
 * Normalized cut of a cluster, or NaN for a null handle.
 *
 * # Safety
 * `c` must be null or a live cluster handle.
 */
double pprls_cluster_phi(const struct PprlsCluster *c);

/**
 * Copies the sorted member list into `buf`, which must hold at least `pprls_cluster_size` entries.
 *
 * # Safety
 * `c` must be a live cluster handle and `buf` writable for `len` values.
 */
enum PprlsStatus pprls_cluster_members(const struct PprlsCluster *c, size_t *buf, size_t len);

/**
 * Releases a cluster. Null is ignored.
 *
 * # Safety
 * `c` must come from [`pprls_cluster`] and not be used afterwards.
 */
void pprls_cluster_free(struct PprlsCluster *c);

/**
 * Uniform mixing time. `mixed` is set to false when the walk has not mixed by `t_max`.
 *
 * # Safety
 * `g` must be a live graph handle; `tau` and `mixed` must be writable.
 */
enum PprlsStatus pprls_mixing_time(const struct PprlsGraph *g,
                                   uint64_t t_max,
                                   uint64_t *tau,
                                   bool *mixed);

/**
 * Volume of the cap of height `h` of a `d`-ball of radius `r`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PprlsStatus pprls_spherical_cap_volume(double r, double h, size_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPRLS_H */
