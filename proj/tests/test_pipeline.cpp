#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "ctlo/pipeline.hpp"
#include "ctlo/simulator.hpp"
#include "doctest.h"

using namespace ctlo;

namespace {

std::vector<Scan> static_scans(int n_scans, double sigma_r = 0.0, std::uint64_t seed = 1) {
  sim::Scene scene = sim::corridor_scene(20, 6, 4);
  scene.sigma_r = sigma_r;
  const auto traj = sim::GroundTruthTrajectory::Integrate(
      0.1 * n_scans, 1000.0, [](double) { return Twist(); });
  return sim::raycast_sequence(scene, traj, sim::PatternConfig{}, n_scans, 0.1, seed).scans;
}

}  // namespace

TEST_CASE("a stationary device stays at the identity") {
  const auto scans = static_scans(5);
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  REQUIRE(engine.trajectory().size() == 5);
  CHECK_FALSE(engine.any_divergence());
  for (const TrajectoryRecord& rec : engine.trajectory()) {
    CHECK_FALSE(rec.diverged);
    CHECK(ominus(rec.T_e, Pose::Identity()).norm() < 1e-6);
    CHECK(ominus(rec.T_b, Pose::Identity()).norm() < 1e-6);
  }
}

TEST_CASE("a stationary device with range noise stays near the identity") {
  const auto scans = static_scans(4, 0.02, 3);
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  CHECK_FALSE(engine.any_divergence());
  for (const TrajectoryRecord& rec : engine.trajectory()) {
    CHECK(ominus(rec.T_e, Pose::Identity()).norm() < 0.02);
  }
}

TEST_CASE("constant forward motion is tracked against ground truth") {
  sim::Scene scene = sim::corridor_scene(20, 6, 4);
  const auto traj = sim::GroundTruthTrajectory::Integrate(1.4, 1000.0, [](double t) {
    return t < 0.4 ? Twist() : Twist(Vec3(1, 0, 0), Vec3::Zero());
  });
  const auto simres = sim::raycast_sequence(scene, traj, sim::PatternConfig{}, 14, 0.1, 2);
  const OdometryEngine engine = run_sequence(simres.scans, OdometryConfig{});
  CHECK_FALSE(engine.any_divergence());
  double worst = 0;
  for (std::size_t i = 0; i < engine.trajectory().size(); ++i) {
    const TrajectoryRecord& rec = engine.trajectory()[i];
    worst = std::max(
        worst, (rec.T_e.translation - simres.gt_states[i].T_e.translation).norm());
  }
  CHECK(worst < 0.05);
  // the engine actually moved about a meter forward
  CHECK(engine.trajectory().back().T_e.translation.x() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("an empty first scan flags divergence without crashing") {
  Scan empty;
  empty.t_b = 0;
  empty.t_e = 0.1;
  OdometryEngine engine{OdometryConfig{}};
  const TrajectoryRecord rec = engine.process_scan(empty);
  CHECK(rec.diverged);
  CHECK(engine.any_divergence());
  CHECK(rec.T_e.isApprox(Pose::Identity(), 1e-15));
}

TEST_CASE("a dropout mid-sequence falls back to the prediction and recovers") {
  auto scans = static_scans(6);
  scans[3].points.clear();  // total dropout for one window
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  REQUIRE(engine.trajectory().size() == 6);
  CHECK(engine.trajectory()[3].diverged);
  CHECK(engine.any_divergence());
  // stationary prediction keeps the pose at identity, later scans re-register
  CHECK(ominus(engine.trajectory()[3].T_e, Pose::Identity()).norm() < 1e-6);
  CHECK_FALSE(engine.trajectory()[5].diverged);
  CHECK(ominus(engine.trajectory()[5].T_e, Pose::Identity()).norm() < 1e-6);
}

TEST_CASE("points outside the range gate are ignored") {
  auto scans = static_scans(3);
  for (Scan& scan : scans) {
    scan.points.push_back({Vec3(0.01, 0, 0), scan.t_b});     // below r_min
    scan.points.push_back({Vec3(5000, 0, 0), scan.t_b});     // beyond r_max
  }
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  CHECK_FALSE(engine.any_divergence());
  for (const TrajectoryRecord& rec : engine.trajectory()) {
    CHECK(ominus(rec.T_e, Pose::Identity()).norm() < 1e-6);
  }
  // no gated point may enter the map: ranges stay within the gate
  for (auto [u, v] : engine.map().occupied_pixels()) {
    const double r = engine.map().at(u, v).range;
    CHECK(r > 0.5);
    CHECK(r < 200.0);
  }
}

TEST_CASE("two identical runs produce bitwise identical trajectories") {
  const auto scans = static_scans(4, 0.02, 17);
  OdometryConfig cfg;
  cfg.registration.deterministic = true;
  const OdometryEngine a = run_sequence(scans, cfg);
  const OdometryEngine b = run_sequence(scans, cfg);
  REQUIRE(a.trajectory().size() == b.trajectory().size());
  for (std::size_t i = 0; i < a.trajectory().size(); ++i) {
    CHECK(a.trajectory()[i].T_e.rotation == b.trajectory()[i].T_e.rotation);
    CHECK(a.trajectory()[i].T_e.translation == b.trajectory()[i].T_e.translation);
  }
}

TEST_CASE("the map never outgrows its pixel budget") {
  const auto scans = static_scans(6, 0.02, 5);
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  const auto& params = engine.map().params();
  const std::size_t budget = static_cast<std::size_t>(params.width) * params.height;
  CHECK(engine.map().occupied_count() <= budget);
  CHECK(engine.map().occupied_count() > 0);
  CHECK(engine.trajectory().size() == scans.size());
}

TEST_CASE("degenerate single-point scans do not crash the pipeline") {
  std::vector<Scan> scans;
  for (int i = 0; i < 4; ++i) {
    Scan s;
    s.t_b = 0.1 * i;
    s.t_e = 0.1 * (i + 1);
    s.points.push_back({Vec3(5, 0, 0), s.t_b + 0.05});
    scans.push_back(s);
  }
  const OdometryEngine engine = run_sequence(scans, OdometryConfig{});
  REQUIRE(engine.trajectory().size() == 4);
  // one isolated pixel yields no normals, so later scans cannot register
  for (std::size_t i = 1; i < engine.trajectory().size(); ++i) {
    CHECK(engine.trajectory()[i].diverged);
  }
}

TEST_CASE("map origin follows the scan-begin pose") {
  sim::Scene scene = sim::corridor_scene(20, 6, 4);
  const auto traj = sim::GroundTruthTrajectory::Integrate(0.9, 1000.0, [](double t) {
    return t < 0.4 ? Twist() : Twist(Vec3(1, 0, 0), Vec3::Zero());
  });
  const auto simres = sim::raycast_sequence(scene, traj, sim::PatternConfig{}, 9, 0.1, 2);
  const OdometryEngine engine = run_sequence(simres.scans, OdometryConfig{});
  CHECK_FALSE(engine.any_divergence());
  const Pose origin = engine.map().origin();
  const Pose expected = engine.trajectory().back().T_b;
  CHECK((origin.translation - expected.translation).norm() < 1e-12);
  CHECK((origin.rotation - expected.rotation).norm() < 1e-12);
}
