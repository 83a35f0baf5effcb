#include "ctlo/simulator.hpp"

#include <cmath>
#include <stdexcept>

namespace ctlo {
namespace sim {

namespace {

constexpr double kGolden = 1.6180339887498949;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a2c1d38e5dd7ULL;
  return x ^ (x >> 31);
}

// Deterministic per-sample Gaussian draw, independent of iteration order.
double gaussian_noise(std::uint64_t seed, std::uint64_t sample_index) {
  const std::uint64_t h1 = splitmix64(seed ^ splitmix64(sample_index));
  const std::uint64_t h2 = splitmix64(h1);
  const double u1 = (static_cast<double>(h1 >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vec3 direction_from_angles(double az, double el) {
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

}  // namespace

ScanPattern generate_pattern(const PatternConfig& cfg, double t0, double window) {
  if (cfg.rate <= 0) throw std::invalid_argument("generate_pattern: zero sample rate");
  const std::size_t n = static_cast<std::size_t>(std::lround(cfg.rate * window));
  ScanPattern out;
  out.directions.reserve(n);
  out.times.reserve(n);

  if (cfg.kind == PatternKind::kRosette) {
    // Two counter-rotating components with incommensurate rates, like a
    // two-prism scanner. Amplitudes satisfy a1^2*w1 + a2^2*w2 = 0, so the
    // pattern carries no net angular circulation: with a circulating pattern,
    // a roll of the sensor is nearly indistinguishable from a phase shift of
    // the sweep, and that degeneracy turns map noise into a systematic roll
    // bias during continuous-time estimation.
    // The sweep direction alternates every frame (an oscillating rather than
    // ratcheting drive): the residual handedness coupling flips sign with the
    // sweep direction, so consecutive frames cancel it instead of integrating
    // it into a secular roll drift.
    const long long frame = std::llround(t0 / window);
    const double dir = (frame % 2 == 0) ? 1.0 : -1.0;
    const double w1 = dir * 2.0 * M_PI * 43.0;
    const double w2 = -dir * 2.0 * M_PI * 43.0 * kGolden;
    const double a2_over_a1 = 1.0 / std::sqrt(kGolden);
    const double a1 = 0.5 / (1.0 + a2_over_a1);
    const double a2 = a1 * a2_over_a1;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = t0 + static_cast<double>(i) / cfg.rate;
      const double az = cfg.fov_hor * (a1 * std::cos(w1 * t) + a2 * std::cos(w2 * t));
      const double el = cfg.fov_ver * (a1 * std::sin(w1 * t) + a2 * std::sin(w2 * t));
      out.directions.push_back(direction_from_angles(az, el));
      out.times.push_back(t);
    }
  } else {
    const int cols = std::max<int>(1, static_cast<int>(std::lround(
                                          std::sqrt(static_cast<double>(n) * cfg.fov_hor /
                                                    std::max(cfg.fov_ver, 1e-9)))));
    const int rows = std::max<int>(1, static_cast<int>((n + cols - 1) / cols));
    for (std::size_t i = 0; i < n; ++i) {
      const int row = static_cast<int>(i) / cols;
      int col = static_cast<int>(i) % cols;
      if (row % 2 == 1) col = cols - 1 - col;  // serpentine
      const double az =
          cols == 1 ? 0.0 : cfg.fov_hor * (static_cast<double>(col) / (cols - 1) - 0.5);
      const double el =
          rows == 1 ? 0.0 : cfg.fov_ver * (static_cast<double>(row) / (rows - 1) - 0.5);
      out.directions.push_back(direction_from_angles(az, el));
      out.times.push_back(t0 + static_cast<double>(i) / cfg.rate);
    }
  }
  return out;
}

Scene corridor_scene(double len_x, double len_y, double len_z) {
  const double hx = 0.5 * len_x, hy = 0.5 * len_y, hz = 0.5 * len_z;
  Scene scene;
  auto add = [&](const Vec3& point, const Vec3& normal, const Vec3& au, const Vec3& av,
                 double half_u, double half_v) {
    scene.planes.push_back(Plane{point, normal, au, av, half_u, half_v});
  };
  add({0, 0, -hz}, {0, 0, 1}, Vec3::UnitX(), Vec3::UnitY(), hx, hy);   // floor
  add({0, 0, hz}, {0, 0, -1}, Vec3::UnitX(), Vec3::UnitY(), hx, hy);   // ceiling
  add({0, -hy, 0}, {0, 1, 0}, Vec3::UnitX(), Vec3::UnitZ(), hx, hz);   // right wall
  add({0, hy, 0}, {0, -1, 0}, Vec3::UnitX(), Vec3::UnitZ(), hx, hz);   // left wall
  add({hx, 0, 0}, {-1, 0, 0}, Vec3::UnitY(), Vec3::UnitZ(), hy, hz);   // far end
  add({-hx, 0, 0}, {1, 0, 0}, Vec3::UnitY(), Vec3::UnitZ(), hy, hz);   // near end
  return scene;
}

void add_box(Scene& scene, const Vec3& c, const Vec3& s) {
  const double hx = 0.5 * s.x(), hy = 0.5 * s.y(), hz = 0.5 * s.z();
  auto add = [&](const Vec3& point, const Vec3& normal, const Vec3& au, const Vec3& av,
                 double half_u, double half_v) {
    scene.planes.push_back(Plane{point, normal, au, av, half_u, half_v});
  };
  add(c + Vec3(hx, 0, 0), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), hy, hz);
  add(c - Vec3(hx, 0, 0), -Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), hy, hz);
  add(c + Vec3(0, hy, 0), Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ(), hx, hz);
  add(c - Vec3(0, hy, 0), -Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ(), hx, hz);
  add(c + Vec3(0, 0, hz), Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY(), hx, hy);
}

Scene hall_scene() {
  // The hall is deliberately low (6 m, sensor at mid-height): with a +/-35
  // degree vertical field of view the floor and ceiling then stay visible
  // whenever a wall is closer than ~5 m, which keeps roll, pitch and z
  // observable even when the view is filled by a single frontal wall.
  Scene scene = corridor_scene(60.0, 20.0, 6.0);
  const double floor_z = -3.0;
  // square pillars along both walls
  for (int k = -3; k <= 3; ++k) {
    const double x = 8.0 * k;
    // the slot at (0, 6.5) stays clear: the loop trajectory passes through it
    if (k != 0) add_box(scene, Vec3(x, 6.5, floor_z + 2.75), Vec3(1.2, 1.2, 5.5));
    add_box(scene, Vec3(x, -6.5, floor_z + 2.75), Vec3(1.2, 1.2, 5.5));
  }
  // free-standing pillar at the center of the loop clearing: always a close
  // off-axis landmark for the loop trajectory
  add_box(scene, Vec3(0, 2.5, floor_z + 2.75), Vec3(1.2, 1.2, 5.5));
  // crates scattered off the center line
  const double crates[][4] = {
      {-20, 3.0, 2.2, 2.2},  {-14, -3.5, 1.6, 1.6}, {-6, 4.0, 2.6, 2.0},
      {-2, -3.0, 1.4, 1.8},  {5.5, 3.2, 2.0, 2.4},    {10, -3.8, 1.8, 1.5},
      {14, 4.2, 2.4, 2.0},   {18, -3.0, 1.5, 2.2},  {22, 3.5, 2.2, 1.7},
      {26, -4.0, 1.9, 2.5},  {-7, 6.5, 2.0, 2.2},   {-10, 4.5, 1.7, 1.9},
  };
  for (const auto& cr : crates) {
    add_box(scene, Vec3(cr[0], cr[1], floor_z + 0.5 * cr[3]), Vec3(cr[2], cr[2], cr[3]));
  }
  // horizontal ledges running along every wall at two heights: when the view
  // is filled by a single frontal wall, their z-facing surfaces are what keeps
  // roll and z observable (a lone frontal plane says nothing about rotation
  // about its own normal)
  const double ledge_depth = 0.25;  // half-depth, protrudes 0.5 m
  for (double side : {-1.0, 1.0}) {
    // +/-1.2 m keeps the ledges inside the +/-35 degree vertical field of view
    // down to a wall distance of ~1.7 m, so they keep constraining rotation
    // about the wall normal even on the closest wall pass
    for (double zl : {-1.2, 1.2}) {
      const Vec3 n = (zl < 0 ? 1.0 : -1.0) * Vec3::UnitZ();  // visible face
      scene.planes.push_back(Plane{Vec3(0, side * (10.0 - ledge_depth), zl), n,
                                   Vec3::UnitX(), Vec3::UnitY(), 29.0, ledge_depth});
      scene.planes.push_back(Plane{Vec3(side * (30.0 - ledge_depth), 0, zl), n,
                                   Vec3::UnitY(), Vec3::UnitX(), 9.0, ledge_depth});
    }
  }
  // full-height vertical ribs on every wall: their side faces are the only
  // structure that pins translation *along* a wall when that wall fills the
  // view (a bare plane plus horizontal ledges says nothing about sliding
  // parallel to itself)
  for (double side : {-1.0, 1.0}) {
    for (double x = -27.0; x <= 27.0; x += 6.0) {
      add_box(scene, Vec3(x, side * 9.75, 0.0), Vec3(0.5, 0.5, 6.0));
    }
    for (double y = -7.5; y <= 7.5; y += 5.0) {
      add_box(scene, Vec3(side * 29.75, y, 0.0), Vec3(0.5, 0.5, 6.0));
    }
  }
  // tilted panels leaning near the walls, for normal diversity
  const double panels[][3] = {{-18, 1}, {-10, -1}, {2, -1}, {6, 1}, {12, 1}, {20, -1}};
  for (const auto& pn : panels) {
    const double side = pn[1];
    const Vec3 n = Vec3(0.25, -side * 0.8, 0.55).normalized();
    const Vec3 au = n.cross(Vec3::UnitX()).normalized();
    const Vec3 av = n.cross(au);
    scene.planes.push_back(Plane{Vec3(pn[0], side * 8.5, floor_z + 1.5), n, au, av, 1.3, 1.3});
  }
  return scene;
}

double raycast(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  double best = -1;
  for (const Plane& plane : scene.planes) {
    const double denom = dir.dot(plane.normal);
    if (std::abs(denom) < 1e-12) continue;
    const double t = (plane.point - origin).dot(plane.normal) / denom;
    if (t <= 1e-9) continue;
    const Vec3 rel = origin + t * dir - plane.point;
    if (std::abs(rel.dot(plane.axis_u)) > plane.half_u ||
        std::abs(rel.dot(plane.axis_v)) > plane.half_v) {
      continue;
    }
    if (best < 0 || t < best) best = t;
  }
  return best;
}

GroundTruthTrajectory::GroundTruthTrajectory(std::vector<double> times, std::vector<Pose> poses)
    : times_(std::move(times)), poses_(std::move(poses)) {
  if (times_.size() != poses_.size() || times_.empty()) {
    throw std::invalid_argument("GroundTruthTrajectory: keyframe size mismatch");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] <= times_[i - 1]) {
      throw std::invalid_argument("GroundTruthTrajectory: timestamps not increasing");
    }
  }
}

Pose GroundTruthTrajectory::at(double t) const {
  if (t <= times_.front()) return poses_.front();
  if (t >= times_.back()) return poses_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  State seg{poses_[k], poses_[k + 1], times_[k], times_[k + 1]};
  return interpolate_pose(seg, t);
}

SimulationResult raycast_sequence(const Scene& scene, const GroundTruthTrajectory& traj,
                                  const PatternConfig& pattern, int n_scans, double window,
                                  std::uint64_t seed) {
  SimulationResult out;
  const double t_start = traj.t_begin();
  out.gt_poses.push_back({t_start, traj.at(t_start)});
  std::uint64_t sample_index = 0;
  for (int k = 0; k < n_scans; ++k) {
    const double t_b = t_start + k * window;
    const double t_e = t_b + window;
    const ScanPattern pat = generate_pattern(pattern, t_b, window);
    Scan scan;
    scan.t_b = t_b;
    scan.t_e = t_e;
    scan.points.reserve(pat.directions.size());
    for (std::size_t i = 0; i < pat.directions.size(); ++i, ++sample_index) {
      const Pose pose = traj.at(pat.times[i]);
      const Vec3 dir_world = pose.rotation * pat.directions[i];
      double range = raycast(scene, pose.translation, dir_world);
      if (range < 0) continue;
      if (scene.sigma_r > 0) range += scene.sigma_r * gaussian_noise(seed, sample_index);
      if (range <= 0) continue;
      scan.points.push_back({range * pat.directions[i], pat.times[i]});
    }
    out.scans.push_back(std::move(scan));
    out.gt_states.push_back(State{traj.at(t_b), traj.at(t_e), t_b, t_e});
    out.gt_poses.push_back({t_e, traj.at(t_e)});
  }
  return out;
}

Metrics evaluate(const std::vector<TrajectoryPose>& est, const std::vector<TrajectoryPose>& gt,
                 double max_dt) {
  if (est.empty() || gt.empty()) throw IoError("evaluate: empty trajectory");
  Metrics m;
  std::vector<std::pair<const TrajectoryPose*, const TrajectoryPose*>> pairs;
  for (const TrajectoryPose& e : est) {
    const TrajectoryPose* best = nullptr;
    double best_dt = max_dt;
    for (const TrajectoryPose& g : gt) {
      const double dt = std::abs(g.t - e.t);
      if (dt <= best_dt) {
        best_dt = dt;
        best = &g;
      }
    }
    if (best != nullptr) pairs.emplace_back(&e, best);
  }
  if (pairs.empty()) throw IoError("evaluate: no overlapping timestamps");
  m.matched = pairs.size();

  double sq_sum = 0;
  for (const auto& [e, g] : pairs) {
    sq_sum += (e->pose.translation - g->pose.translation).squaredNorm();
  }
  m.ate_rmse = std::sqrt(sq_sum / static_cast<double>(pairs.size()));

  double drift_sum = 0;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const Pose rel_est = pairs[i - 1].first->pose.inverse() * pairs[i].first->pose;
    const Pose rel_gt = pairs[i - 1].second->pose.inverse() * pairs[i].second->pose;
    drift_sum += (rel_est.translation - rel_gt.translation).norm();
  }
  if (pairs.size() > 1) drift_sum /= static_cast<double>(pairs.size() - 1);
  m.mean_drift = drift_sum;

  m.end_to_end = (est.back().pose.translation - gt.front().pose.translation).norm();
  return m;
}

namespace {

// Trapezoidal speed profile on [t0, t1] with linear ramps of length `ramp` at
// both ends; returns the scale of the peak value at time t, zero outside.
double trapezoid(double t, double t0, double t1, double ramp) {
  if (t < t0 || t >= t1) return 0.0;
  if (t < t0 + ramp) return (t - t0) / ramp;
  if (t >= t1 - ramp) return (t1 - t) / ramp;
  return 1.0;
}

// Smooth circular loop: forward speed and yaw rate share the same trapezoid
// shape, so the path is an arc of constant radius traversed at varying speed.
// The yaw-rate area is exactly 2*pi, which closes the loop by construction,
// and the ramps keep the velocity continuous so constant-velocity prediction
// stays a good initial guess throughout.
Twist corridor_loop_vel(double t) {
  // The arc starts at the origin and curves left, so the circle center sits at
  // (0, radius); radius 2.5 keeps every wall at least 5 m away, so the floor
  // and ceiling never leave the vertical field of view and roll stays
  // observable all the way around the loop.
  const double radius = 2.5;
  const double w_peak = 2.0 * M_PI / 18.0;       // ~20 deg/s; area over 18.5 s = 2*pi
  const double s = trapezoid(t, 1.0, 19.5, 0.5);
  return Twist(Vec3(radius * w_peak * s, 0, 0), Vec3(0, 0, w_peak * s));
}

Twist fast_rotation_vel(double t) {
  const Vec3 fwd(3.0, 0, 0);
  const Vec3 yaw(0, 0, M_PI / 2.0);          // peak 90 deg/s, area = 180 deg
  Vec3 v = Vec3::Zero(), w = Vec3::Zero();
  v += trapezoid(t, 1.0, 4.0, 0.5) * fwd;
  w += trapezoid(t, 4.0, 6.25, 0.25) * yaw;
  v += trapezoid(t, 6.25, 9.25, 0.5) * fwd;
  w += trapezoid(t, 9.25, 11.5, 0.25) * yaw;
  return Twist(v, w);
}

Twist sparse_noisy_vel(double t) {
  const Vec3 fwd(3.0, 0, 0);
  const Vec3 yaw(0, 0, M_PI / 3.5);
  Vec3 v = Vec3::Zero(), w = Vec3::Zero();
  v += trapezoid(t, 1.0, 5.0, 0.5) * fwd;
  w += trapezoid(t, 5.0, 9.0, 0.5) * yaw;
  v += trapezoid(t, 9.0, 13.0, 0.5) * fwd;
  w += trapezoid(t, 13.0, 17.0, 0.5) * yaw;
  return Twist(v, w);
}

Twist screw_vel(double /*t*/) { return Twist(Vec3(1.0, 0, 0), Vec3(0, 0, 2.0)); }

}  // namespace

Scenario make_scenario(const std::string& name, double duration) {
  Scenario sc;
  // hall-sized scene: ranges of several meters to tens of meters keep the
  // surface patches behind each map pixel large relative to the range noise,
  // and the clutter constrains every direction at close range
  sc.scene = hall_scene();
  const double keyframe_rate = 1000.0;
  if (name == "corridor_loop") {
    if (duration <= 0) duration = 20.0;
    sc.scene.sigma_r = 0.02;
    sc.trajectory = GroundTruthTrajectory::Integrate(duration, keyframe_rate, corridor_loop_vel);
  } else if (name == "fast_rotation") {
    if (duration <= 0) duration = 12.0;
    sc.trajectory = GroundTruthTrajectory::Integrate(duration, keyframe_rate, fast_rotation_vel);
  } else if (name == "sparse_noisy") {
    if (duration <= 0) duration = 18.0;
    sc.scene.sigma_r = 0.05;
    sc.pattern.rate = 15000.0;
    sc.trajectory = GroundTruthTrajectory::Integrate(duration, keyframe_rate, sparse_noisy_vel);
  } else if (name == "screw") {
    if (duration <= 0) duration = 1.0;
    sc.trajectory = GroundTruthTrajectory::Integrate(duration, keyframe_rate, screw_vel);
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  sc.n_scans = static_cast<int>(std::floor(duration / sc.window + 1e-9));
  return sc;
}

SimulationResult simulate_scenario(const std::string& name, std::uint64_t seed,
                                   double duration) {
  const Scenario sc = make_scenario(name, duration);
  return raycast_sequence(sc.scene, sc.trajectory, sc.pattern, sc.n_scans, sc.window, seed);
}

}  // namespace sim
}  // namespace ctlo
