#include "ctlo/ctlo_c.h"

#include <cstring>
#include <filesystem>
#include <string>
#include <thread>

#include "ctlo/config.hpp"
#include "ctlo/io.hpp"
#include "ctlo/jacobian_audit.hpp"
#include "ctlo/pipeline.hpp"
#include "ctlo/simulator.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int classify(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const ctlo::ConfigError*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e)) {
    return CTLO_ERR_USAGE;
  }
  return CTLO_ERR_DATA;
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

ctlo::OdometryConfig make_config(const char* config_path, const ctlo_options* opts) {
  ctlo::OdometryConfig cfg =
      config_path ? ctlo::load_config(config_path) : ctlo::default_config();
  ctlo_options defaults;
  ctlo_options_init(&defaults);
  if (!opts) opts = &defaults;
  cfg.registration.ct_enabled = opts->ct_enabled != 0;
  cfg.registration.gmm_enabled = opts->gmm_enabled != 0;
  cfg.registration.deterministic = opts->deterministic != 0;
  cfg.registration.workers = resolve_workers(opts->workers);
  return cfg;
}

}  // namespace

extern "C" {

const char* ctlo_last_error(void) { return g_last_error.c_str(); }

void ctlo_options_init(ctlo_options* opts) {
  opts->ct_enabled = 1;
  opts->gmm_enabled = 1;
  opts->deterministic = 0;
  opts->workers = 0;
  opts->best_effort = 0;
  opts->write_begin = 0;
}

struct ctlo_engine {
  ctlo::OdometryEngine impl;
  bool write_begin = false;
  explicit ctlo_engine(const ctlo::OdometryConfig& cfg) : impl(cfg) {}
};

ctlo_engine* ctlo_engine_create(const char* config_path, const ctlo_options* opts) {
  try {
    auto* engine = new ctlo_engine(make_config(config_path, opts));
    engine->write_begin = opts && opts->write_begin;
    return engine;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ctlo_engine_destroy(ctlo_engine* engine) { delete engine; }

int ctlo_engine_process_scan(ctlo_engine* engine, const double* points, size_t n, double t_b,
                             double t_e) {
  if (!engine || (n > 0 && !points) || t_e <= t_b) {
    set_error("process_scan: invalid arguments");
    return CTLO_ERR_USAGE;
  }
  try {
    ctlo::Scan scan;
    scan.t_b = t_b;
    scan.t_e = t_e;
    scan.points.resize(n);
    for (size_t i = 0; i < n; ++i) {
      scan.points[i].position = ctlo::Vec3(points[4 * i], points[4 * i + 1], points[4 * i + 2]);
      scan.points[i].t = points[4 * i + 3];
    }
    const ctlo::TrajectoryRecord rec = engine->impl.process_scan(scan);
    return rec.diverged ? CTLO_ERR_DIVERGENCE : CTLO_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

size_t ctlo_engine_scan_count(const ctlo_engine* engine) {
  return engine ? engine->impl.trajectory().size() : 0;
}

int ctlo_engine_any_divergence(const ctlo_engine* engine) {
  return engine && engine->impl.any_divergence() ? 1 : 0;
}

int ctlo_engine_last_pose(const ctlo_engine* engine, double pose[7]) {
  if (!engine || engine->impl.trajectory().empty()) {
    set_error("last_pose: no scans processed");
    return CTLO_ERR_USAGE;
  }
  const ctlo::Pose& T = engine->impl.trajectory().back().T_e;
  Eigen::Quaterniond q(T.rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  pose[0] = T.translation.x();
  pose[1] = T.translation.y();
  pose[2] = T.translation.z();
  pose[3] = q.x();
  pose[4] = q.y();
  pose[5] = q.z();
  pose[6] = q.w();
  return CTLO_OK;
}

int ctlo_engine_write_trajectory(const ctlo_engine* engine, const char* path) {
  if (!engine || !path) {
    set_error("write_trajectory: invalid arguments");
    return CTLO_ERR_USAGE;
  }
  try {
    ctlo::write_trajectory(engine->impl.trajectory(), path, engine->write_begin);
    return CTLO_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

int ctlo_engine_export_map(const ctlo_engine* engine, const char* path) {
  if (!engine || !path) {
    set_error("export_map: invalid arguments");
    return CTLO_ERR_USAGE;
  }
  try {
    ctlo::export_map(engine->impl.map(), engine->impl.normal_maps(), path);
    return CTLO_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

int ctlo_run(const char* config_path, const char* scans_path, const char* trajectory_out,
             const char* map_out, const ctlo_options* opts) {
  if (!scans_path || !trajectory_out) {
    set_error("run: scans path and trajectory output are required");
    return CTLO_ERR_USAGE;
  }
  if (config_path && !std::filesystem::exists(config_path)) {
    set_error(std::string("config file not found: ") + config_path);
    return CTLO_ERR_USAGE;
  }
  try {
    const ctlo::OdometryConfig cfg = make_config(config_path, opts);
    const std::vector<ctlo::Scan> scans = ctlo::read_scans(scans_path);
    const ctlo::OdometryEngine engine = ctlo::run_sequence(scans, cfg);
    ctlo::write_trajectory(engine.trajectory(), trajectory_out, opts && opts->write_begin);
    if (map_out) ctlo::export_map(engine.map(), engine.normal_maps(), map_out);
    if (engine.any_divergence() && !(opts && opts->best_effort)) {
      set_error("one or more scans diverged");
      return CTLO_ERR_DIVERGENCE;
    }
    return CTLO_OK;
  } catch (const ctlo::ConfigError& e) {
    set_error(e.what());
    return CTLO_ERR_USAGE;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

int ctlo_simulate(const char* scenario, const char* out_dir, uint64_t seed, double duration,
                  size_t* n_scans, size_t* n_points) {
  if (!scenario || !out_dir) {
    set_error("simulate: scenario and output directory are required");
    return CTLO_ERR_USAGE;
  }
  try {
    const ctlo::sim::SimulationResult result =
        ctlo::sim::simulate_scenario(scenario, seed, duration);
    std::filesystem::create_directories(out_dir);
    ctlo::write_scans_csv(result.scans, out_dir, scenario);
    ctlo::write_trajectory(result.gt_poses,
                           (std::filesystem::path(out_dir) / "groundtruth.txt").string());
    if (n_scans) *n_scans = result.scans.size();
    if (n_points) {
      *n_points = 0;
      for (const ctlo::Scan& s : result.scans) *n_points += s.points.size();
    }
    return CTLO_OK;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return CTLO_ERR_USAGE;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

int ctlo_evaluate(const char* est_path, const char* gt_path, double metrics[3]) {
  if (!est_path || !gt_path) {
    set_error("evaluate: both trajectory paths are required");
    return CTLO_ERR_USAGE;
  }
  try {
    const auto est = ctlo::read_trajectory(est_path);
    const auto gt = ctlo::read_trajectory(gt_path);
    const ctlo::sim::Metrics m = ctlo::sim::evaluate(est, gt);
    if (metrics) {
      metrics[0] = m.end_to_end;
      metrics[1] = m.ate_rmse;
      metrics[2] = m.mean_drift;
    }
    return CTLO_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

int ctlo_check_jacobians(uint64_t seed, int trials, double* max_rel_err) {
  if (trials < 0) {
    set_error("check_jacobians: negative trial count");
    return CTLO_ERR_USAGE;
  }
  const double worst = trials == 0 ? 0.0 : ctlo::jacobian_audit_max_rel_err(seed, trials);
  if (max_rel_err) *max_rel_err = worst;
  if (worst >= 1e-4) {
    set_error("analytic Jacobians disagree with finite differences");
    return CTLO_ERR_DIVERGENCE;
  }
  return CTLO_OK;
}

}  // extern "C"
