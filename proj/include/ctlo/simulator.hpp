#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctlo/io.hpp"
#include "ctlo/motion.hpp"

namespace ctlo {
namespace sim {

enum class PatternKind { kRosette, kRaster };

struct PatternConfig {
  PatternKind kind = PatternKind::kRosette;
  double fov_hor = 70.0 * M_PI / 180.0;
  double fov_ver = 70.0 * M_PI / 180.0;
  double rate = 100000.0;  // samples per second
};

/// Unit directions in the sensor frame with strictly increasing timestamps.
struct ScanPattern {
  std::vector<Vec3> directions;
  std::vector<double> times;
};

/// Samples one integration window starting at t0. Rosette phase follows
/// absolute time, so consecutive windows trace different curves.
ScanPattern generate_pattern(const PatternConfig& cfg, double t0, double window);

struct Plane {
  Vec3 point{Vec3::Zero()};
  Vec3 normal{Vec3::UnitZ()};
  Vec3 axis_u{Vec3::UnitX()};
  Vec3 axis_v{Vec3::UnitY()};
  double half_u = 1;
  double half_v = 1;
};

struct Scene {
  std::vector<Plane> planes;
  double sigma_r = 0;  // range noise std-dev (m)
};

/// Axis-aligned box interior (six inward-facing planes), centered at origin.
Scene corridor_scene(double len_x = 20, double len_y = 6, double len_z = 4);

/// Adds the five visible faces of an axis-aligned box standing on the floor.
void add_box(Scene& scene, const Vec3& center, const Vec3& size);

/// Hall-sized corridor with pillars and tilted panels along both walls; the
/// clutter keeps every degree of freedom well constrained at close range.
Scene hall_scene();

/// Nearest in-extent hit along `dir` from `origin`; returns range or -1.
double raycast(const Scene& scene, const Vec3& origin, const Vec3& dir);

/// Dense keyframes with the same SE(3) interpolation rule the odometry uses.
class GroundTruthTrajectory {
 public:
  GroundTruthTrajectory() = default;
  GroundTruthTrajectory(std::vector<double> times, std::vector<Pose> poses);

  /// Integrates a body-frame twist-rate profile v(t) at `keyframe_rate`.
  template <typename VelFn>
  static GroundTruthTrajectory Integrate(double duration, double keyframe_rate, VelFn&& vel) {
    std::vector<double> times;
    std::vector<Pose> poses;
    const double dt = 1.0 / keyframe_rate;
    const std::size_t n = static_cast<std::size_t>(std::ceil(duration * keyframe_rate));
    times.reserve(n + 1);
    poses.reserve(n + 1);
    Pose pose;
    times.push_back(0.0);
    poses.push_back(pose);
    for (std::size_t i = 0; i < n; ++i) {
      // index-based times keep segment boundaries of piecewise profiles exact
      const double t = static_cast<double>(i) * dt;
      const double t_next = std::min(duration, static_cast<double>(i + 1) * dt);
      pose = pose * exp(vel(t) * (t_next - t));
      times.push_back(t_next);
      poses.push_back(pose);
    }
    return GroundTruthTrajectory(std::move(times), std::move(poses));
  }

  Pose at(double t) const;
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<Pose> poses_;
};

struct SimulationResult {
  std::vector<Scan> scans;
  std::vector<State> gt_states;
  std::vector<TrajectoryPose> gt_poses;  // pose at each scan's t_e
};

/// Casts the pattern from the moving sensor: each sample uses the pose at its
/// own timestamp, which is exactly what produces intra-scan distortion.
SimulationResult raycast_sequence(const Scene& scene, const GroundTruthTrajectory& traj,
                                  const PatternConfig& pattern, int n_scans, double window,
                                  std::uint64_t seed);

struct Metrics {
  double end_to_end = 0;     // |p_est_last - p_gt_first|
  double ate_rmse = 0;       // after timestamp association
  double mean_drift = 0;     // mean relative translation error per step
  std::size_t matched = 0;
};

Metrics evaluate(const std::vector<TrajectoryPose>& est, const std::vector<TrajectoryPose>& gt,
                 double max_dt = 0.05);

struct Scenario {
  Scene scene;
  GroundTruthTrajectory trajectory;
  PatternConfig pattern;
  double window = 0.1;
  int n_scans = 0;
};

/// Named scenarios: corridor_loop, fast_rotation, sparse_noisy, screw.
/// duration <= 0 keeps the scenario default.
Scenario make_scenario(const std::string& name, double duration = -1);

SimulationResult simulate_scenario(const std::string& name, std::uint64_t seed,
                                   double duration = -1);

}  // namespace sim
}  // namespace ctlo
