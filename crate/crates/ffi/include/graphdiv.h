#ifndef GRAPHDIV_H
#define GRAPHDIV_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. `GD_STATUS_OK` is zero.
 */
typedef enum {
  GD_STATUS_OK = 0,
  GD_STATUS_NULL_ARGUMENT = 1,
  GD_STATUS_INVALID_UTF8 = 2,
  GD_STATUS_DOC_NOT_FOUND = 3,
  GD_STATUS_INVALID_PARAMS = 4,
  GD_STATUS_NO_MATCHING_CENTER = 5,
  GD_STATUS_INSUFFICIENT_VERTICES = 6,
  GD_STATUS_NO_ADMISSIBLE_VERTEX = 7,
  GD_STATUS_MALFORMED_INPUT = 8,
  GD_STATUS_IO_ERROR = 9,
  GD_STATUS_GUARD_EXCEEDED = 10,
  /**
   * A panic was caught inside the library.
   */
  GD_STATUS_INTERNAL = 11,
} GdStatus;

typedef enum {
  GD_VARIANT_MIN_AVG = 0,
  GD_VARIANT_MIN_MAX = 1,
} GdVariant;

/**
 * Opaque immutable graph.
 */
typedef struct GdGraph GdGraph;

/**
 * Opaque diversified result.
 */
typedef struct GdResult GdResult;

/**
 * Ranking and pipeline parameters; start from `gd_params_default`.
 */
typedef struct {
  double lambda;
  double alpha;
  double beta;
  /**
   * A `GdVariant` value.
   */
  uint32_t variant;
  uint32_t n;
  uint32_t k_g;
  uint32_t k_c;
  /**
   * Per-addendum time-out in ms, 0 for none.
   */
  uint64_t td_ms;
  /**
   * Hill-climbing cut-off in ms, 0 for none, negative for the default.
   */
  int64_t tc_ms;
} GdParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default parameters: n = 10, two seeds and two candidates, λ = β = 0.8,
 * α = 0, MIN_AVG, no time-outs.
 */
GdParams gd_params_default(void);

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *gd_last_error_message(void);

/**
 * Static name of a status, e.g. `"DOC_NOT_FOUND"`.
 */
const char *gd_status_name(GdStatus status);

/**
 * Loads a graph file written by `graphdiv ingest` or `graphdiv generate`.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
GdStatus gd_graph_load(const char *path, GdGraph **out);

/**
 * Builds a synthetic graph; `vocab` 0 means ten times `lemmas`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
GdStatus gd_graph_generate(uint32_t docs,
                           uint32_t links,
                           uint32_t lemmas,
                           uint32_t vocab,
                           double skew,
                           uint64_t seed,
                           GdGraph **out);

/**
 * # Safety
 * `graph` must come from a `gd_graph_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void gd_graph_free(GdGraph *graph);

/**
 * Number of documents, 0 for a null graph.
 *
 * # Safety
 * `graph` must be null or a live graph handle.
 */
size_t gd_graph_vertex_count(const GdGraph *graph);

/**
 * Number of links, 0 for a null graph.
 *
 * # Safety
 * `graph` must be null or a live graph handle.
 */
size_t gd_graph_edge_count(const GdGraph *graph);

/**
 * Vertex number of the document with external id `id`.
 *
 * # Safety
 * `graph` must be a live handle, `id` nul-terminated, `out` valid.
 */
GdStatus gd_graph_lookup(const GdGraph *graph, const char *id, uint32_t *out);

/**
 * Picks the query center best matching free text.
 *
 * # Safety
 * `graph` must be a live handle, `query` nul-terminated, `out` valid.
 */
GdStatus gd_resolve_query(const GdGraph *graph, const char *query, uint32_t *out);

/**
 * Best single addition to `set` (length `set_len`, may be null when 0)
 * around `center`; only the ranking fields of `params` are used.
 *
 * # Safety
 * `graph` must be a live handle, `params`, `out_vertex` and `out_gain`
 * valid, and `set` readable for `set_len` elements.
 */
GdStatus gd_verso(const GdGraph *graph,
                  uint32_t center,
                  const uint32_t *set,
                  size_t set_len,
                  const GdParams *params,
                  uint32_t *out_vertex,
                  double *out_gain);

/**
 * Greedy seeding plus hill climbing around `center`.
 *
 * # Safety
 * `graph` must be a live handle and `params`, `out` valid pointers.
 */
GdStatus gd_diversify(const GdGraph *graph,
                      uint32_t center,
                      const GdParams *params,
                      GdResult **out);

/**
 * Number of items, 0 for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t gd_result_len(const GdResult *result);

/**
 * Vertex numbers in result order, valid while the result lives.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const uint32_t *gd_result_items(const GdResult *result);

/**
 * External id of item `index`, or null when out of range.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
const char *gd_result_item_id(const GdResult *result, size_t index);

/**
 * Set score (lower is better), NaN for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
double gd_result_score(const GdResult *result);

/**
 * # Safety
 * `result` must come from `gd_diversify` and not be used afterwards. Null
 * is ignored.
 */
void gd_result_free(GdResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHDIV_H */
