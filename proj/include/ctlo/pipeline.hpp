#pragma once

#include <vector>

#include "ctlo/range_image.hpp"
#include "ctlo/registration.hpp"

namespace ctlo {

struct OdometryConfig {
  ProjectionParams projection = ProjectionParams::FromDegrees(80.0, 80.0, 10.0);
  RegistrationConfig registration;
  double scan_window = 0.1;  // seconds
  double r_min = 0.5;
  double r_max = 200.0;
  int normal_patch = 5;
  int normal_min_neighbors = 5;
  // number of leading scans merged into the initial map while the device is
  // assumed static; denser seeding stabilizes the first registrations
  int init_scans = 10;
};

struct TrajectoryRecord {
  double t_b = 0;
  double t_e = 0;
  Pose T_b;
  Pose T_e;
  RegistrationDiagnostics diag;
  bool diverged = false;
};

/// Scan-to-map odometry loop: predict, register, shift the map origin,
/// merge the scan, refresh normals for the next scan.
class OdometryEngine {
 public:
  explicit OdometryEngine(const OdometryConfig& config);

  TrajectoryRecord process_scan(const Scan& scan);

  const std::vector<TrajectoryRecord>& trajectory() const { return records_; }
  const RangeImageMap& map() const { return map_; }
  const VertexNormalMaps& normal_maps() const { return maps_; }
  const OdometryConfig& config() const { return config_; }
  bool any_divergence() const { return any_divergence_; }

 private:
  Scan gate_scan(const Scan& scan) const;

  OdometryConfig config_;
  RangeImageMap map_;
  VertexNormalMaps maps_;
  State state_;
  std::vector<Scan> init_buffer_;
  bool initialized_ = false;
  bool any_divergence_ = false;
  std::vector<TrajectoryRecord> records_;
};

/// Streams every scan through an engine; returns it with the full trajectory
/// and final map.
OdometryEngine run_sequence(const std::vector<Scan>& scans, const OdometryConfig& config);

}  // namespace ctlo
