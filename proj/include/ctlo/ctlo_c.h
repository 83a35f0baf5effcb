#ifndef CTLO_CTLO_C_H_
#define CTLO_CTLO_C_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CTLO_EXPORT __declspec(dllexport)
#else
#define CTLO_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes shared with the CLI exit codes. */
enum {
  CTLO_OK = 0,
  CTLO_ERR_DIVERGENCE = 1,
  CTLO_ERR_USAGE = 2, /* bad config / bad arguments */
  CTLO_ERR_DATA = 3   /* unreadable or malformed input data */
};

/* Message for the most recent failure on this thread. */
CTLO_EXPORT const char* ctlo_last_error(void);

typedef struct ctlo_options {
  int ct_enabled;     /* 0 disables continuous-time interpolation */
  int gmm_enabled;    /* 0 falls back to single-nearest point-to-plane */
  int deterministic;  /* 1 forces sequential reductions */
  int workers;        /* <= 0 picks hardware concurrency */
  int best_effort;    /* run: return CTLO_OK even when scans diverged */
  int write_begin;    /* trajectory: also emit scan-begin pose lines */
} ctlo_options;

CTLO_EXPORT void ctlo_options_init(ctlo_options* opts);

/* --- Streaming engine ---------------------------------------------------- */

typedef struct ctlo_engine ctlo_engine;

/* config_path may be NULL for defaults. Returns NULL on error. */
CTLO_EXPORT ctlo_engine* ctlo_engine_create(const char* config_path, const ctlo_options* opts);
CTLO_EXPORT void ctlo_engine_destroy(ctlo_engine* engine);

/* points: n * 4 doubles (x, y, z, t). Returns CTLO_OK or CTLO_ERR_DIVERGENCE. */
CTLO_EXPORT int ctlo_engine_process_scan(ctlo_engine* engine, const double* points, size_t n,
                                         double t_b, double t_e);

CTLO_EXPORT size_t ctlo_engine_scan_count(const ctlo_engine* engine);
CTLO_EXPORT int ctlo_engine_any_divergence(const ctlo_engine* engine);

/* pose: tx ty tz qx qy qz qw of the scan-end pose of the latest scan. */
CTLO_EXPORT int ctlo_engine_last_pose(const ctlo_engine* engine, double pose[7]);

CTLO_EXPORT int ctlo_engine_write_trajectory(const ctlo_engine* engine, const char* path);
CTLO_EXPORT int ctlo_engine_export_map(const ctlo_engine* engine, const char* path);

/* --- One-shot commands --------------------------------------------------- */

/* Runs a whole sequence from a scan file/directory. map_out may be NULL. */
CTLO_EXPORT int ctlo_run(const char* config_path, const char* scans_path,
                         const char* trajectory_out, const char* map_out,
                         const ctlo_options* opts);

/* Writes per-scan CSV files plus groundtruth.txt under out_dir.
 * duration <= 0 keeps the scenario default. Outputs scan/point counts. */
CTLO_EXPORT int ctlo_simulate(const char* scenario, const char* out_dir, uint64_t seed,
                              double duration, size_t* n_scans, size_t* n_points);

/* metrics: end-to-end error, ATE RMSE, mean per-step drift (meters). */
CTLO_EXPORT int ctlo_evaluate(const char* est_path, const char* gt_path, double metrics[3]);

/* Finite-difference audit of the analytic Jacobians. Nonzero when the worst
 * relative error reaches 1e-4. */
CTLO_EXPORT int ctlo_check_jacobians(uint64_t seed, int trials, double* max_rel_err);

#ifdef __cplusplus
}
#endif

#endif /* CTLO_CTLO_C_H_ */
