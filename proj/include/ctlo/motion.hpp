#pragma once

#include <vector>

#include "ctlo/se3.hpp"

namespace ctlo {

struct ScanPoint {
  Vec3 position{Vec3::Zero()};  // sensor frame at sample instant
  double t = 0;                 // seconds
};

/// Points accumulated over one integration window [t_b, t_e).
struct Scan {
  std::vector<ScanPoint> points;
  double t_b = 0;
  double t_e = 0;
};

/// The 12-DoF optimization variable: scan-begin and scan-end poses.
struct State {
  Pose T_b;
  Pose T_e;
  double t_b = 0;
  double t_e = 0;

  Twist tangent() const { return ominus(T_e, T_b); }
};

/// Pose at t_i by linear interpolation on SE(3) between the state's two
/// control poses. t_i outside [t_b, t_e] throws.
Pose interpolate_pose(const State& state, double t_i);

/// Interpolation with a precomputed tangent, for tight loops.
Pose interpolate_pose(const State& state, const Twist& tangent, double t_i);

/// Transforms every scan point by its interpolated pose (world frame).
/// Out-of-window timestamps are clamped to the window bounds.
std::vector<Vec3> compensate(const Scan& scan, const State& state);

/// Constant-velocity prediction for the next integration window.
State predict_state(const State& prev, double t_b, double t_e);

/// Fills in per-point timestamps linearly by index when a source lacks them.
void assign_timestamps_by_index(Scan& scan);

}  // namespace ctlo
