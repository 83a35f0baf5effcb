#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "ctlo/motion.hpp"
#include "doctest.h"

using namespace ctlo;

namespace {

State yaw_state(double yaw_end) {
  State s;
  s.T_b = Pose::Identity();
  s.T_e = exp(Twist(Vec3::Zero(), Vec3(0, 0, yaw_end)));
  s.t_b = 0;
  s.t_e = 0.1;
  return s;
}

}  // namespace

TEST_CASE("interpolation hits both endpoints") {
  State s;
  s.T_b = exp(Twist(Vec3(1, 0, 0), Vec3(0.1, 0.2, -0.1)));
  s.T_e = exp(Twist(Vec3(1.2, 0.1, 0), Vec3(0.15, 0.2, -0.05)));
  s.t_b = 1.0;
  s.t_e = 1.1;
  CHECK(interpolate_pose(s, s.t_b).isApprox(s.T_b, 1e-12));
  CHECK(interpolate_pose(s, s.t_e).isApprox(s.T_e, 1e-10));
}

TEST_CASE("midpoint of a quarter turn is an eighth turn") {
  const State s = yaw_state(M_PI_2);
  const Pose mid = interpolate_pose(s, 0.05);
  const Twist xi = log(mid);
  CHECK(std::abs(xi.phi.z() - M_PI_4) < 1e-12);
  CHECK(mid.translation.norm() < 1e-12);
}

TEST_CASE("timestamps outside the window are rejected") {
  const State s = yaw_state(M_PI_2);
  CHECK_THROWS_AS(interpolate_pose(s, -0.01), std::out_of_range);
  CHECK_THROWS_AS(interpolate_pose(s, 0.11), std::out_of_range);
}

TEST_CASE("identity trajectory leaves points untouched") {
  Scan scan;
  scan.t_b = 0;
  scan.t_e = 0.1;
  scan.points = {{Vec3(1, 2, 3), 0.02}, {Vec3(-1, 0, 5), 0.07}};
  State s;
  s.t_b = 0;
  s.t_e = 0.1;
  const auto out = compensate(scan, s);
  CHECK((out[0] - Vec3(1, 2, 3)).norm() < 1e-15);
  CHECK((out[1] - Vec3(-1, 0, 5)).norm() < 1e-15);
}

TEST_CASE("compensation depends only on the normalized phase") {
  Scan scan;
  scan.t_b = 0;
  scan.t_e = 0.1;
  scan.points = {{Vec3(2, 1, 0), 0.04}, {Vec3(0, 3, 1), 0.09}};
  State s = yaw_state(0.3);
  s.T_b = exp(Twist(Vec3(0.5, 0, 0), Vec3(0, 0.1, 0)));
  const auto out1 = compensate(scan, s);

  Scan doubled = scan;
  doubled.t_e = 0.2;
  for (auto& pt : doubled.points) pt.t *= 2.0;
  State s2 = s;
  s2.t_e = 0.2;
  const auto out2 = compensate(doubled, s2);
  for (std::size_t i = 0; i < out1.size(); ++i) {
    CHECK((out1[i] - out2[i]).norm() < 1e-14);
  }
}

TEST_CASE("prediction from a stationary state is stationary") {
  State prev;
  prev.t_b = 0;
  prev.t_e = 0.1;
  const State next = predict_state(prev, 0.1, 0.2);
  CHECK(next.T_b.isApprox(Pose::Identity(), 1e-15));
  CHECK(next.T_e.isApprox(Pose::Identity(), 1e-15));
}

TEST_CASE("constant-velocity translation prediction") {
  State prev;
  prev.T_e = Pose(Mat3::Identity(), Vec3(1, 0, 0));
  prev.t_b = 0;
  prev.t_e = 0.1;
  const State next = predict_state(prev, 0.1, 0.2);
  CHECK((next.T_b.translation - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((next.T_e.translation - Vec3(2, 0, 0)).norm() < 1e-15);
}

TEST_CASE("constant-velocity rotation prediction") {
  State prev;
  prev.T_e = exp(Twist(Vec3::Zero(), Vec3(0, 0, M_PI / 6)));
  prev.t_b = 0;
  prev.t_e = 0.1;
  const State next = predict_state(prev, 0.1, 0.2);
  const Pose expected = exp(Twist(Vec3::Zero(), Vec3(0, 0, M_PI / 3)));
  CHECK(next.T_e.isApprox(expected, 1e-10));
}

TEST_CASE("prediction begin pose is the previous end pose, bitwise") {
  State prev;
  prev.T_b = exp(Twist(Vec3(0.3, 0.1, 0), Vec3(0, 0, 0.2)));
  prev.T_e = exp(Twist(Vec3(0.5, 0.2, 0), Vec3(0, 0, 0.4)));
  prev.t_b = 0;
  prev.t_e = 0.1;
  const State next = predict_state(prev, 0.1, 0.2);
  CHECK(next.T_b.rotation == prev.T_e.rotation);
  CHECK(next.T_b.translation == prev.T_e.translation);
}

TEST_CASE("pure-translation interpolation is affine in time") {
  State s;
  s.T_e = Pose(Mat3::Identity(), Vec3(2, -1, 0.5));
  s.t_b = 0;
  s.t_e = 1.0;
  for (double t : {0.25, 0.5, 0.75}) {
    const Pose p = interpolate_pose(s, t);
    CHECK((p.translation - t * Vec3(2, -1, 0.5)).norm() < 1e-12);
  }
}

TEST_CASE("missing timestamps get assigned linearly by index") {
  Scan scan;
  scan.t_b = 0.5;
  scan.t_e = 0.6;
  scan.points.resize(10);
  assign_timestamps_by_index(scan);
  CHECK(scan.points.front().t == doctest::Approx(0.5));
  CHECK(scan.points[5].t == doctest::Approx(0.55));
  CHECK(scan.points.back().t < 0.6);
}
