#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "ctlo/range_image.hpp"
#include "ctlo/simulator.hpp"
#include "doctest.h"

using namespace ctlo;
using namespace ctlo::sim;

namespace {

GroundTruthTrajectory static_traj(double duration) {
  return GroundTruthTrajectory::Integrate(duration, 1000.0, [](double) { return Twist(); });
}

std::set<std::pair<int, int>> pattern_pixels(const ScanPattern& pat,
                                             const ProjectionParams& params) {
  std::set<std::pair<int, int>> px;
  for (const Vec3& d : pat.directions) {
    const PixelCoord c = project(d, params);
    if (c.in_bounds) px.insert({c.u, c.v});
  }
  return px;
}

}  // namespace

TEST_CASE("pattern sample count and timestamps follow the rate") {
  PatternConfig cfg;
  cfg.rate = 10000.0;
  const ScanPattern pat = generate_pattern(cfg, 0.3, 0.1);
  REQUIRE(pat.directions.size() == 1000);
  REQUIRE(pat.times.size() == 1000);
  CHECK(pat.times.front() == doctest::Approx(0.3));
  CHECK(pat.times.back() == doctest::Approx(0.3 + 999.0 / 10000.0));
  for (std::size_t i = 1; i < pat.times.size(); ++i) {
    CHECK(pat.times[i] > pat.times[i - 1]);
  }
}

TEST_CASE("every pattern direction stays inside the field of view") {
  for (PatternKind kind : {PatternKind::kRosette, PatternKind::kRaster}) {
    PatternConfig cfg;
    cfg.kind = kind;
    cfg.rate = 20000.0;
    const ScanPattern pat = generate_pattern(cfg, 1.7, 0.1);
    for (const Vec3& d : pat.directions) {
      CHECK(std::abs(d.norm() - 1.0) < 1e-12);
      const double az = std::atan2(d.y(), d.x());
      const double el = std::asin(d.z());
      CHECK(std::abs(az) <= 0.5 * cfg.fov_hor + 1e-9);
      CHECK(std::abs(el) <= 0.5 * cfg.fov_ver + 1e-9);
    }
  }
}

TEST_CASE("consecutive rosette windows fill in new pixels") {
  PatternConfig cfg;
  cfg.rate = 10000.0;
  const auto params = ProjectionParams::FromDegrees(70, 70, 10);
  auto covered = pattern_pixels(generate_pattern(cfg, 0.0, 0.1), params);
  const std::size_t single = covered.size();
  for (int k = 1; k < 5; ++k) {
    const auto more = pattern_pixels(generate_pattern(cfg, 0.1 * k, 0.1), params);
    covered.insert(more.begin(), more.end());
  }
  CHECK(single > 100);
  CHECK(covered.size() > single * 2);  // non-repetitive accumulation
}

TEST_CASE("raster covers its grid more uniformly than a single rosette window") {
  const auto params = ProjectionParams::FromDegrees(70, 70, 2);
  PatternConfig rast;
  rast.kind = PatternKind::kRaster;
  rast.rate = 20000.0;
  const auto px = pattern_pixels(generate_pattern(rast, 0.0, 0.1), params);
  CHECK(px.size() > 1000);
}

TEST_CASE("raycast hits the expected wall ranges") {
  const Scene scene = corridor_scene(20, 6, 4);
  CHECK(raycast(scene, Vec3::Zero(), Vec3(1, 0, 0)) == doctest::Approx(10.0));
  CHECK(raycast(scene, Vec3::Zero(), Vec3(-1, 0, 0)) == doctest::Approx(10.0));
  CHECK(raycast(scene, Vec3::Zero(), Vec3(0, 1, 0)) == doctest::Approx(3.0));
  CHECK(raycast(scene, Vec3::Zero(), Vec3(0, 0, -1)) == doctest::Approx(2.0));
  // diagonal toward the near corner of floor and side wall
  const Vec3 diag = Vec3(0, 1, -1).normalized();
  CHECK(raycast(scene, Vec3::Zero(), diag) == doctest::Approx(2.0 * std::sqrt(2.0)));
  // from off-center
  CHECK(raycast(scene, Vec3(8, 0, 0), Vec3(1, 0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("trajectory interpolation matches the closed-form screw") {
  const Twist rate(Vec3(1, 0, 0), Vec3(0, 0, 2.0));
  const auto traj = GroundTruthTrajectory::Integrate(1.0, 1000.0, [&](double) { return rate; });
  for (double t : {0.0, 0.123456, 0.5, 0.77, 1.0}) {
    const Pose expected = exp(rate * t);
    const Pose got = traj.at(t);
    CHECK((got.rotation - expected.rotation).norm() < 1e-9);
    CHECK((got.translation - expected.translation).norm() < 1e-9);
  }
  // clamped outside the keyframes
  CHECK(traj.at(-1.0).isApprox(traj.at(0.0), 1e-15));
  CHECK(traj.at(2.0).isApprox(traj.at(1.0), 1e-15));
}

TEST_CASE("static sensor samples lie exactly on the scene planes") {
  Scene scene = corridor_scene(20, 6, 4);
  const auto traj = static_traj(0.2);
  const auto result = raycast_sequence(scene, traj, PatternConfig{}, 2, 0.1, 1);
  REQUIRE(result.scans.size() == 2);
  std::size_t total = 0;
  for (const Scan& scan : result.scans) {
    for (const ScanPoint& pt : scan.points) {
      double best = 1e9;
      for (const Plane& plane : scene.planes) {
        best = std::min(best, std::abs((pt.position - plane.point).dot(plane.normal)));
      }
      CHECK(best < 1e-9);
      ++total;
    }
  }
  CHECK(total > 10000);
}

TEST_CASE("forward motion shortens the measured forward range by the distance moved") {
  Scene scene = corridor_scene(20, 6, 4);
  // 1 m/s forward; compare the same absolute-time sample in consecutive scans
  const auto traj =
      GroundTruthTrajectory::Integrate(0.5, 1000.0, [](double) {
        return Twist(Vec3(1, 0, 0), Vec3::Zero());
      });
  PatternConfig cfg;
  cfg.rate = 10000.0;
  const auto result = raycast_sequence(scene, traj, cfg, 2, 0.1, 1);
  // the rosette has period-like revisits; instead compare via raycast directly
  const double r0 = raycast(scene, traj.at(0.0).translation, Vec3(1, 0, 0));
  const double r1 = raycast(scene, traj.at(0.1).translation, Vec3(1, 0, 0));
  CHECK(r0 - r1 == doctest::Approx(0.1).epsilon(1e-9));
  // and the emitted scan windows carry the matching gt states
  REQUIRE(result.gt_states.size() == 2);
  CHECK((result.gt_states[1].T_b.translation - Vec3(0.1, 0, 0)).norm() < 1e-9);
}

TEST_CASE("per-sample poses reproduce intra-scan distortion exactly on a screw") {
  const auto sc = make_scenario("screw");
  const auto result = raycast_sequence(sc.scene, sc.trajectory, sc.pattern, sc.n_scans,
                                       sc.window, /*seed=*/7);
  double worst = 0;
  for (std::size_t k = 0; k < result.scans.size(); ++k) {
    const Scan& scan = result.scans[k];
    const State& gt = result.gt_states[k];
    for (const ScanPoint& pt : scan.points) {
      // undistort with the gt state: world point must sit on a scene plane
      const Pose pose_i = interpolate_pose(gt, pt.t);
      const Vec3 world = pose_i * pt.position;
      double best = 1e9;
      for (const Plane& plane : sc.scene.planes) {
        best = std::min(best, std::abs((world - plane.point).dot(plane.normal)));
      }
      worst = std::max(worst, best);
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("noise is deterministic per seed and independent across seeds") {
  const auto a1 = simulate_scenario("sparse_noisy", 42, 0.6);
  const auto a2 = simulate_scenario("sparse_noisy", 42, 0.6);
  const auto b = simulate_scenario("sparse_noisy", 43, 0.6);
  REQUIRE(a1.scans.size() == a2.scans.size());
  bool any_diff_seed = false;
  for (std::size_t s = 0; s < a1.scans.size(); ++s) {
    REQUIRE(a1.scans[s].points.size() == a2.scans[s].points.size());
    for (std::size_t i = 0; i < a1.scans[s].points.size(); ++i) {
      CHECK(a1.scans[s].points[i].position == a2.scans[s].points[i].position);
    }
    if (s < b.scans.size()) {
      for (std::size_t i = 0; i < std::min(a1.scans[s].points.size(), b.scans[s].points.size());
           ++i) {
        if (a1.scans[s].points[i].position != b.scans[s].points[i].position) {
          any_diff_seed = true;
          break;
        }
      }
    }
  }
  CHECK(any_diff_seed);
}

TEST_CASE("noisy ranges scatter around the true planes") {
  auto sc = make_scenario("sparse_noisy", 0.4);
  const auto result = raycast_sequence(sc.scene, sc.trajectory, sc.pattern, sc.n_scans,
                                       sc.window, 9);
  double sq = 0;
  std::size_t n = 0;
  for (const Scan& scan : result.scans) {
    for (const ScanPoint& pt : scan.points) {
      const Vec3 dir = pt.position.normalized();
      const double truth = raycast(sc.scene, Vec3::Zero(), dir);
      REQUIRE(truth > 0);
      sq += (pt.position.norm() - truth) * (pt.position.norm() - truth);
      ++n;
    }
  }
  REQUIRE(n > 1000);
  const double std_dev = std::sqrt(sq / n);
  CHECK(std_dev == doctest::Approx(0.05).epsilon(0.1));
}

TEST_CASE("metrics against a naive oracle") {
  std::vector<TrajectoryPose> gt, est;
  for (int i = 0; i < 10; ++i) {
    TrajectoryPose g;
    g.t = 0.1 * i;
    g.pose = Pose(Mat3::Identity(), Vec3(0.5 * i, 0, 0));
    gt.push_back(g);
    est.push_back(g);
  }
  const Metrics same = evaluate(est, gt);
  CHECK(same.matched == 10);
  CHECK(same.ate_rmse < 1e-15);
  CHECK(same.mean_drift < 1e-15);
  CHECK(same.end_to_end == doctest::Approx(4.5));  // est end vs gt start

  // constant 1 m offset: ATE 1, zero drift
  for (auto& e : est) e.pose.translation += Vec3(0, 1, 0);
  const Metrics off = evaluate(est, gt);
  CHECK(off.ate_rmse == doctest::Approx(1.0));
  CHECK(off.mean_drift < 1e-15);

  // per-step drift of 0.1 m: ATE rmse via explicit sum
  est = gt;
  for (int i = 0; i < 10; ++i) est[i].pose.translation += Vec3(0, 0.1 * i, 0);
  const Metrics drift = evaluate(est, gt);
  double sq = 0;
  for (int i = 0; i < 10; ++i) sq += 0.01 * i * i;
  CHECK(drift.ate_rmse == doctest::Approx(std::sqrt(sq / 10)));
  CHECK(drift.mean_drift == doctest::Approx(0.1));
}

TEST_CASE("metrics association respects the timestamp gate") {
  std::vector<TrajectoryPose> gt(1), est(1);
  gt[0].t = 0.0;
  est[0].t = 10.0;
  CHECK_THROWS_AS(evaluate(est, gt), IoError);
  est[0].t = 0.04;  // inside the default 0.05 gate
  CHECK(evaluate(est, gt).matched == 1);
  CHECK_THROWS_AS(evaluate({}, gt), IoError);
}

TEST_CASE("scenario factory rejects unknown names and sizes the scan count") {
  CHECK_THROWS_AS(make_scenario("no_such"), std::invalid_argument);
  const auto sc = make_scenario("corridor_loop");
  CHECK(sc.n_scans == 200);
  CHECK(sc.scene.sigma_r == doctest::Approx(0.02));
  CHECK(make_scenario("screw").n_scans == 10);
  CHECK(make_scenario("fast_rotation", 2.0).n_scans == 20);
}

TEST_CASE("corridor loop returns to its starting pose") {
  const auto sc = make_scenario("corridor_loop");
  const Pose start = sc.trajectory.at(sc.trajectory.t_begin());
  const Pose end = sc.trajectory.at(sc.trajectory.t_end());
  CHECK((end.translation - start.translation).norm() < 1e-6);
  CHECK((end.rotation - start.rotation).norm() < 1e-6);
}

TEST_CASE("simulation output timestamps are strictly ordered and windowed") {
  const auto result = simulate_scenario("fast_rotation", 5, 1.0);
  REQUIRE(result.scans.size() == 10);
  for (std::size_t s = 0; s < result.scans.size(); ++s) {
    const Scan& scan = result.scans[s];
    CHECK(scan.t_e - scan.t_b == doctest::Approx(0.1));
    for (const ScanPoint& pt : scan.points) {
      CHECK(pt.t >= scan.t_b);
      CHECK(pt.t < scan.t_e);
    }
    if (s > 0) CHECK(scan.t_b == doctest::Approx(result.scans[s - 1].t_e));
  }
  // gt_poses: initial pose plus one per scan
  CHECK(result.gt_poses.size() == result.scans.size() + 1);
}
