#include "ctlo/se3.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ctlo {

namespace {
constexpr double kSmallAngle = 1e-6;
}

Mat3 orthonormalize(const Mat3& R) {
  const Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1;
    out = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return out;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double s = std::sin(theta), c = std::cos(theta);
  return Mat3::Identity() + (s / theta) * W + ((1.0 - c) / (theta * theta)) * W * W;
}

Vec3 so3_log(const Mat3& R) {
  const double tr = R.trace();
  const double cos_theta = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < kSmallAngle) {
    // log(R) ~ 0.5 * vee(R - R^T) to first order
    return 0.5 * w;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the skew part degenerates; recover the axis from the
    // symmetric part: R ~ 2 n n^T - I.
    Vec3 n;
    const Mat3 S = 0.5 * (R + Mat3::Identity());
    int k;
    S.diagonal().maxCoeff(&k);
    n = S.col(k) / std::sqrt(S(k, k));
    // Branch tie-break: largest-magnitude axis component made positive.
    int imax;
    n.cwiseAbs().maxCoeff(&imax);
    if (n(imax) < 0) n = -n;
    // Align with the skew part when it has not fully degenerated.
    if (w.dot(n) < 0) n = -n;
    return theta * n;
  }
  return (theta / (2.0 * std::sin(theta))) * w;
}

Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() + a * W + b * W * W;
}

Mat3 so3_left_jacobian_inv(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() - 0.5 * W + (1.0 / 12.0) * W * W;
  }
  // coefficient (1 - (theta/2) cot(theta/2)) / theta^2 stays finite up to pi
  const double half = 0.5 * theta;
  const double coef = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Mat3::Identity() - 0.5 * W + coef * W * W;
}

Pose exp(const Twist& xi) {
  return Pose(so3_exp(xi.phi), so3_left_jacobian(xi.phi) * xi.rho);
}

Twist log(const Pose& T) {
  const Vec3 phi = so3_log(T.rotation);
  return Twist(so3_left_jacobian_inv(phi) * T.translation, phi);
}

Pose oplus(const Pose& X, const Twist& xi) { return X * exp(xi); }

Twist ominus(const Pose& Y, const Pose& X) { return log(X.inverse() * Y); }

namespace {

// Upper-right block of the SE(3) left Jacobian (Barfoot's Q matrix),
// tangent ordering (rho, phi).
Mat3 se3_q_matrix(const Vec3& rho, const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 P = skew(rho);
  const Mat3 W = skew(phi);
  double a, b, c;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 1.0 / 6.0 - t2 / 120.0;
    b = 1.0 / 24.0 - t2 / 720.0;
    c = 1.0 / 120.0 - t2 / 2520.0;
  } else {
    const double t2 = theta * theta;
    const double t4 = t2 * t2;
    const double s = std::sin(theta), co = std::cos(theta);
    a = (theta - s) / (t2 * theta);
    b = (t2 + 2.0 * co - 2.0) / (2.0 * t4);
    c = (2.0 * theta - 3.0 * s + theta * co) / (2.0 * t4 * theta);
  }
  const Mat3 WP = W * P, PW = P * W, WPW = WP * W;
  return 0.5 * P + a * (WP + PW + WPW) + b * (W * WP + PW * W - 3.0 * WPW) +
         c * (WPW * W + W * WPW);
}

}  // namespace

Mat6 left_jacobian(const Twist& xi) {
  const Mat3 J = so3_left_jacobian(xi.phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.bottomRightCorner<3, 3>() = J;
  out.topRightCorner<3, 3>() = se3_q_matrix(xi.rho, xi.phi);
  return out;
}

Mat6 left_jacobian_inv(const Twist& xi) {
  const Mat3 Jinv = so3_left_jacobian_inv(xi.phi);
  const Mat3 Q = se3_q_matrix(xi.rho, xi.phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = Jinv;
  out.bottomRightCorner<3, 3>() = Jinv;
  out.topRightCorner<3, 3>() = -Jinv * Q * Jinv;
  return out;
}

Mat6 right_jacobian(const Twist& xi) { return left_jacobian(-xi); }

Mat6 right_jacobian_inv(const Twist& xi) { return left_jacobian_inv(-xi); }

}  // namespace ctlo
