#include "ctlo/pipeline.hpp"

namespace ctlo {

OdometryEngine::OdometryEngine(const OdometryConfig& config)
    : config_(config), map_(config.projection) {}

Scan OdometryEngine::gate_scan(const Scan& scan) const {
  Scan out;
  out.t_b = scan.t_b;
  out.t_e = scan.t_e;
  out.points.reserve(scan.points.size());
  for (const ScanPoint& pt : scan.points) {
    const double r = pt.position.norm();
    if (r > config_.r_min && r < config_.r_max) out.points.push_back(pt);
  }
  return out;
}

TrajectoryRecord OdometryEngine::process_scan(const Scan& raw) {
  const Scan scan = gate_scan(raw);
  TrajectoryRecord rec;
  rec.t_b = scan.t_b;
  rec.t_e = scan.t_e;

  if (!initialized_) {
    // The device is assumed static while the map is seeded from the first
    // init_scans scans; their poses are pinned to the identity.
    state_ = State{Pose::Identity(), Pose::Identity(), scan.t_b, scan.t_e};
    init_buffer_.push_back(scan);
    if (static_cast<int>(init_buffer_.size()) >= std::max(1, config_.init_scans)) {
      std::size_t total = 0;
      for (const Scan& s : init_buffer_) total += s.points.size();
      if (total > 0) {
        map_ = initialize_map(init_buffer_, config_.projection);
        maps_ = estimate_normals(map_, config_.registration.delta_sigma, config_.normal_patch,
                                 config_.normal_min_neighbors, config_.registration.workers);
        initialized_ = true;
      } else {
        rec.diverged = true;
        any_divergence_ = true;
      }
      init_buffer_.clear();
    }
    rec.T_b = state_.T_b;
    rec.T_e = state_.T_e;
    records_.push_back(rec);
    return rec;
  }

  RegistrationDiagnostics diag;
  const State registered = register_scan(scan, map_, maps_, state_, config_.registration, &diag);
  rec.diag = diag;

  if (diag.diverged) {
    // Fall back to the prediction and freeze the map for this scan.
    state_ = predict_state(state_, scan.t_b, scan.t_e);
    rec.diverged = true;
    any_divergence_ = true;
  } else {
    state_ = registered;
    map_ = shift_origin(map_, state_.T_b);
    update_map(map_, scan, state_);
    maps_ = estimate_normals(map_, config_.registration.delta_sigma, config_.normal_patch,
                             config_.normal_min_neighbors, config_.registration.workers);
  }

  rec.T_b = state_.T_b;
  rec.T_e = state_.T_e;
  records_.push_back(rec);
  return rec;
}

OdometryEngine run_sequence(const std::vector<Scan>& scans, const OdometryConfig& config) {
  OdometryEngine engine(config);
  for (const Scan& scan : scans) engine.process_scan(scan);
  return engine;
}

}  // namespace ctlo
