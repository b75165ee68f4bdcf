#ifndef PCA_FFI_H
#define PCA_FFI_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PcaMapKind {
  PCA_MAP_KIND_GRID = 0,
  PCA_MAP_KIND_RG_FULL = 1,
  PCA_MAP_KIND_RG_NU = 2,
  PCA_MAP_KIND_GRID_PE = 3,
  PCA_MAP_KIND_SW_FULL = 4,
  PCA_MAP_KIND_SW_COMPOSITE = 5,
} PcaMapKind;

typedef enum PcaStability {
  PCA_STABILITY_ATTRACTING = 0,
  PCA_STABILITY_REPELLING = 1,
  PCA_STABILITY_MARGINAL = 2,
} PcaStability;

// Result codes. Zero is success.
typedef enum PcaStatus {
  PCA_STATUS_OK = 0,
  PCA_STATUS_NULL_POINTER = 1,
  PCA_STATUS_CONFIG = 2,
  PCA_STATUS_DOMAIN = 3,
  PCA_STATUS_CONVERGENCE = 4,
  PCA_STATUS_NO_BIFURCATION = 5,
  PCA_STATUS_PARSE = 6,
  PCA_STATUS_IO = 7,
  PCA_STATUS_BUFFER_TOO_SMALL = 8,
  PCA_STATUS_PANIC = 9,
} PcaStatus;

typedef struct PcaGraph PcaGraph;

typedef struct PcaMap PcaMap;

// Map description. Fields a kind does not use are ignored; `p_edge`
// serves the random-graph maps and `p_wire` the small-world ones.
typedef struct PcaMapParams {
  enum PcaMapKind kind;
  uint32_t n;
  uint32_t gamma;
  double p_edge;
  double p_wire;
  // Small-world mixture only: sum the inner binomial to `k` instead of `k - gamma`.
  bool full_inner;
} PcaMapParams;

typedef struct PcaFixedPoint {
  double rho_star;
  double slope;
  enum PcaStability stability;
} PcaFixedPoint;

// Interval with its raw and clipped ends.
typedef struct PcaInterval {
  double center;
  double half_width;
  double lower;
  double upper;
  bool clipped;
} PcaInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
// message length without the terminator; zero after a successful call.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pca_last_error_message(char *buf, size_t len);

// Periodic lattice: `side * side` nodes (gamma 4 or 8) or a ring of `side`
// nodes (even gamma) when `ring` is set.
//
// # Safety
// `out` must be valid for writes.
enum PcaStatus pca_graph_torus(size_t side, size_t gamma, bool ring, struct PcaGraph **out);

// Erdős–Rényi graph `G(n, p_edge)`.
//
// # Safety
// `out` must be valid for writes.
enum PcaStatus pca_graph_random(size_t n, double p_edge, uint64_t seed, struct PcaGraph **out);

// Ring lattice with `gamma` neighbours plus independent shortcuts.
//
// # Safety
// `out` must be valid for writes.
enum PcaStatus pca_graph_smallworld(size_t n,
                                    size_t gamma,
                                    double p_wire,
                                    uint64_t seed,
                                    struct PcaGraph **out);

// Parses the edge-list text format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` valid for writes.
enum PcaStatus pca_graph_from_edge_list(const char *text, struct PcaGraph **out);

// # Safety
// `graph` must be null or a handle from this library not freed before.
void pca_graph_free(struct PcaGraph *graph);

// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum PcaStatus pca_graph_node_count(const struct PcaGraph *graph, size_t *out);

// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum PcaStatus pca_graph_edge_count(const struct PcaGraph *graph, size_t *out);

// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum PcaStatus pca_graph_degree(const struct PcaGraph *graph, size_t node, size_t *out);

// # Safety
// `graph` must be a live handle and `out` valid for writes.
enum PcaStatus pca_graph_is_connected(const struct PcaGraph *graph, bool *out);

// Writes the edge list as a NUL-terminated string. `needed` receives the
// buffer size required including the terminator; when `len` is smaller
// nothing is written to `buf` and `BufferTooSmall` is returned.
//
// # Safety
// `graph` must be a live handle, `buf` null or valid for `len` bytes, and
// `needed` null or valid for writes.
enum PcaStatus pca_graph_edge_list(const struct PcaGraph *graph,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

// Runs the majority automaton for `steps` steps and writes the `steps + 1`
// densities to `out`. A NaN `rho0` draws the initial active count
// uniformly; otherwise nodes start active independently with that
// probability.
//
// # Safety
// `graph` must be a live handle and `out` valid for `len` doubles.
enum PcaStatus pca_run(const struct PcaGraph *graph,
                       double p,
                       double rho0,
                       size_t steps,
                       uint64_t seed,
                       double *out,
                       size_t len);

// # Safety
// `params` must point to a valid description and `out` be valid for writes.
enum PcaStatus pca_map_new(const struct PcaMapParams *params, double p, struct PcaMap **out);

// # Safety
// `map` must be null or a handle from this library not freed before.
void pca_map_free(struct PcaMap *map);

// # Safety
// `map` must be a live handle and `out` valid for writes.
enum PcaStatus pca_map_eval(const struct PcaMap *map, double rho, double *out);

// # Safety
// `map` must be a live handle and `out` valid for writes.
enum PcaStatus pca_map_derivative(const struct PcaMap *map, double rho, double *out);

// Variance of the next density on `n` nodes.
//
// # Safety
// `map` must be a live handle and `out` valid for writes.
enum PcaStatus pca_map_sigma2(const struct PcaMap *map, uint32_t n, double rho, double *out);

// Writes up to `cap` fixed points in increasing order; `count` receives
// the total number found. Returns `BufferTooSmall` if `cap` is short, with
// the first `cap` entries written.
//
// # Safety
// `map` must be a live handle, `out` valid for `cap` entries (or null when
// `cap` is zero) and `count` valid for writes.
enum PcaStatus pca_fixed_points(const struct PcaMap *map,
                                struct PcaFixedPoint *out,
                                size_t cap,
                                size_t *count);

// Value of `p` in `[lo, hi]` where the slope at one half crosses one.
//
// # Safety
// `params` must point to a valid description and `out` be valid for writes.
enum PcaStatus pca_critical_point(const struct PcaMapParams *params,
                                  double lo,
                                  double hi,
                                  double tol,
                                  double *out);

// Chernov interval holding with probability at least `1 - delta`.
//
// # Safety
// `out` must be valid for writes.
enum PcaStatus pca_chernov_interval(double mu, size_t n, double delta, struct PcaInterval *out);

// Normal interval at level 0.90 or 0.95.
//
// # Safety
// `out` must be valid for writes.
enum PcaStatus pca_clt_interval(double mu, double sigma2, double level, struct PcaInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCA_FFI_H */
