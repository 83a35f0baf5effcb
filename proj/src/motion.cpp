#include "ctlo/motion.hpp"

#include <stdexcept>

namespace ctlo {

Pose interpolate_pose(const State& state, const Twist& tangent, double t_i) {
  if (t_i < state.t_b || t_i > state.t_e) {
    throw std::out_of_range("interpolate_pose: timestamp outside scan window");
  }
  const double alpha = (t_i - state.t_b) / (state.t_e - state.t_b);
  return state.T_b * exp(tangent * alpha);
}

Pose interpolate_pose(const State& state, double t_i) {
  return interpolate_pose(state, state.tangent(), t_i);
}

std::vector<Vec3> compensate(const Scan& scan, const State& state) {
  const Twist tau = state.tangent();
  const double inv_len = 1.0 / (state.t_e - state.t_b);
  std::vector<Vec3> out;
  out.reserve(scan.points.size());
  for (const ScanPoint& pt : scan.points) {
    double alpha = (pt.t - state.t_b) * inv_len;
    alpha = std::clamp(alpha, 0.0, 1.0);
    out.push_back((state.T_b * exp(tau * alpha)) * pt.position);
  }
  return out;
}

State predict_state(const State& prev, double t_b, double t_e) {
  State next;
  next.T_b = prev.T_e;
  next.T_e = next.T_b * (prev.T_b.inverse() * prev.T_e);
  // This recurrence feeds the pose back into itself, which doubles any
  // off-SO(3) round-off per step; project it out before it can compound.
  next.T_b.rotation = orthonormalize(next.T_b.rotation);
  next.T_e.rotation = orthonormalize(next.T_e.rotation);
  next.t_b = t_b;
  next.t_e = t_e;
  return next;
}

void assign_timestamps_by_index(Scan& scan) {
  const std::size_t n = scan.points.size();
  if (n == 0) return;
  const double span = scan.t_e - scan.t_b;
  for (std::size_t i = 0; i < n; ++i) {
    scan.points[i].t = scan.t_b + span * static_cast<double>(i) / static_cast<double>(n);
  }
}

}  // namespace ctlo
