#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ctlo {

using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Tangent-space element of SE(3): translational part first, rotational second.
struct Twist {
  Vec3 rho{Vec3::Zero()};
  Vec3 phi{Vec3::Zero()};

  Twist() = default;
  Twist(const Vec3& rho_, const Vec3& phi_) : rho(rho_), phi(phi_) {}
  explicit Twist(const Vec6& v) : rho(v.head<3>()), phi(v.tail<3>()) {}

  Vec6 vec() const {
    Vec6 v;
    v << rho, phi;
    return v;
  }
  double norm() const { return vec().norm(); }

  Twist operator*(double a) const { return Twist(a * rho, a * phi); }
  Twist operator-() const { return Twist(-rho, -phi); }
  Twist operator+(const Twist& o) const { return Twist(rho + o.rho, phi + o.phi); }
  Twist operator-(const Twist& o) const { return Twist(rho - o.rho, phi - o.phi); }
};

/// Rigid transform in SE(3).
struct Pose {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};

  Pose() = default;
  Pose(const Mat3& R, const Vec3& t) : rotation(R), translation(t) {}

  static Pose Identity() { return Pose(); }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  Pose operator*(const Pose& o) const {
    return Pose(rotation * o.rotation, rotation * o.translation + translation);
  }

  Pose inverse() const {
    Mat3 Rt = rotation.transpose();
    return Pose(Rt, -(Rt * translation));
  }

  bool isApprox(const Pose& o, double tol = 1e-10) const {
    return (rotation - o.rotation).norm() < tol && (translation - o.translation).norm() < tol;
  }
};

Mat3 skew(const Vec3& v);

// SO(3) building blocks.
/// Nearest rotation matrix in the Frobenius norm. Repeated pose composition
/// accumulates round-off that leaves SO(3); any recurrence that feeds a pose
/// back into itself (e.g. constant-velocity prediction) amplifies that
/// component geometrically, so it must be projected out at the feedback point.
Mat3 orthonormalize(const Mat3& R);
Mat3 so3_exp(const Vec3& phi);
Vec3 so3_log(const Mat3& R);
Mat3 so3_left_jacobian(const Vec3& phi);
Mat3 so3_left_jacobian_inv(const Vec3& phi);

// SE(3) maps and right-version operators.
Pose exp(const Twist& xi);
Twist log(const Pose& T);
Pose oplus(const Pose& X, const Twist& xi);
Twist ominus(const Pose& Y, const Pose& X);

// 6x6 group Jacobians, tangent ordering (rho, phi).
Mat6 left_jacobian(const Twist& xi);
Mat6 left_jacobian_inv(const Twist& xi);
Mat6 right_jacobian(const Twist& xi);
Mat6 right_jacobian_inv(const Twist& xi);

}  // namespace ctlo
