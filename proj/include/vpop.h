/*
 * vpop - trace-driven video popularity prediction and cache evaluation.
 *
 * C interface of the shared library. All functions return a vpop_status;
 * on failure vpop_last_error() describes the problem for the calling
 * thread. Objects returned through out-parameters are owned by the
 * caller and released with the matching *_free function.
 *
 * Configuration strings are JSON documents; every field is optional and
 * defaults are documented in the project README. Status values double as
 * process exit codes for the CLI.
 */
#ifndef VPOP_H
#define VPOP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef VPOP_API
#define VPOP_API __attribute__((visibility("default")))
#endif

typedef enum vpop_status {
  VPOP_OK = 0,
  VPOP_CONFIG_ERROR = 2, /* bad configuration, unknown keys, bad paths */
  VPOP_DATA_ERROR = 3,   /* unusable input data */
  VPOP_NUMERIC_ERROR = 4 /* numerical failure */
} vpop_status;

typedef struct vpop_trace vpop_trace;
typedef struct vpop_graph vpop_graph;

/* Message for the most recent failure on this thread; never NULL. */
VPOP_API const char *vpop_last_error(void);

/* ---- traces ---------------------------------------------------------- */

/* format: "csv" (timestamp,user_key,video_key) or "umass" (campus trace
 * layout; unparseable lines are skipped and counted). */
VPOP_API vpop_status vpop_trace_open(const char *path, const char *format,
                                     vpop_trace **out);
VPOP_API vpop_status vpop_trace_parse(const char *data, size_t len,
                                      const char *format, vpop_trace **out);
VPOP_API void vpop_trace_free(vpop_trace *trace);

typedef struct vpop_trace_stats {
  uint64_t transactions;
  uint32_t users;
  uint32_t videos;
  double origin;        /* earliest timestamp, seconds */
  double end_time;      /* latest timestamp, seconds */
  uint64_t skipped_lines;
} vpop_trace_stats;

VPOP_API vpop_status vpop_trace_stats_get(const vpop_trace *trace,
                                          vpop_trace_stats *out);

/* Canonical CSV re-serialization; round-trips exactly. */
VPOP_API vpop_status vpop_trace_save(const vpop_trace *trace, const char *path);

/* ---- power-law fit ---------------------------------------------------- */

typedef struct vpop_powerlaw {
  double alpha;
  double t_min;
  uint64_t samples;
} vpop_powerlaw;

/* Fits the inter-arrival power law on the training span: cascades with
 * at least min_fit_views requests, one mean inter-arrival sample each.
 * out_path may be NULL (no file written); out may be NULL. */
VPOP_API vpop_status vpop_fit(const vpop_trace *trace, const char *config_json,
                              const char *out_path, vpop_powerlaw *out);

/* ---- graph inference --------------------------------------------------- */

/* Relearns the transmission graph on the configured schedule over the
 * test span and writes graph_<i>.csv files into out_dir. */
VPOP_API vpop_status vpop_infer_to_dir(const vpop_trace *trace,
                                       const char *config_json,
                                       const char *out_dir,
                                       uint32_t *graphs_written);

VPOP_API vpop_status vpop_graph_open(const char *path, const vpop_trace *trace,
                                     vpop_graph **out);
VPOP_API void vpop_graph_free(vpop_graph *graph);
VPOP_API vpop_status vpop_graph_stats_get(const vpop_graph *graph,
                                          uint32_t *n_users, uint64_t *n_edges);

/* ---- synthetic worlds -------------------------------------------------- */

/* Generates a trace from a planted world (JSON description) and writes
 * the trace CSV plus the ground-truth graph file. truth_path may be NULL. */
VPOP_API vpop_status vpop_generate(const char *world_json, const char *trace_path,
                                   const char *truth_path);

/* ---- simulation -------------------------------------------------------- */

/* Full train/test hit-rate experiment. Writes periods.csv, summary.csv
 * and hitrate_vs_k.dat into out_dir. */
VPOP_API vpop_status vpop_simulate(const vpop_trace *trace, const char *config_json,
                                   const char *out_dir);

/* Canonical form and hash of a run configuration (for reproducibility
 * checks). The buffer is thread-local and valid until the next call. */
VPOP_API vpop_status vpop_config_canonical(const char *config_json,
                                           const char **canonical,
                                           const char **hash);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VPOP_H */
