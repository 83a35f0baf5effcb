#include "ctlo/jacobian_audit.hpp"

#include <random>

#include "ctlo/registration.hpp"

namespace ctlo {

namespace {

State perturb(const State& s, int coord, double eps) {
  Vec6 d = Vec6::Zero();
  d(coord % 6) = eps;
  State out = s;
  if (coord < 6) {
    out.T_b = oplus(s.T_b, Twist(d));
  } else {
    out.T_e = oplus(s.T_e, Twist(d));
  }
  return out;
}

double rel_err(const Eigen::Ref<const Eigen::RowVectorXd>& analytic,
               const Eigen::Ref<const Eigen::RowVectorXd>& fd) {
  return (analytic - fd).norm() / std::max(fd.norm(), 1e-6);
}

Twist random_twist(std::mt19937_64& rng, double trans_scale, double max_angle) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 rho(u(rng), u(rng), u(rng));
  Vec3 axis(u(rng), u(rng), u(rng));
  if (axis.norm() < 1e-6) axis = Vec3::UnitX();
  std::uniform_real_distribution<double> a(0.0, max_angle);
  return Twist(trans_scale * rho, a(rng) * axis.normalized());
}

}  // namespace

double jacobian_audit_max_rel_err(std::uint64_t seed, int trials, bool flip_sign) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double eps = 1e-6;
  const double sign = flip_sign ? -1.0 : 1.0;
  double worst = 0;

  for (int trial = 0; trial < trials; ++trial) {
    State state;
    state.T_b = exp(random_twist(rng, 2.0, 1.5));
    state.T_e = state.T_b * exp(random_twist(rng, 0.5, 0.8));
    state.t_b = 0;
    state.t_e = 0.1;
    State prev;
    prev.T_b = exp(random_twist(rng, 2.0, 1.5));
    prev.T_e = prev.T_b * exp(random_twist(rng, 0.5, 0.8));
    prev.t_b = -0.1;
    prev.t_e = 0;

    // Registration residual against a synthetic correspondence.
    ScanPoint pt;
    pt.position = Vec3(u(rng), u(rng), u(rng)) * 5.0;
    std::uniform_real_distribution<double> ut(0.0, 0.1);
    pt.t = ut(rng);
    Moments m;
    m.m0 = 1.0;
    m.m1 = Vec3(u(rng), u(rng), u(rng)) * 5.0;
    m.n = Vec3(u(rng), u(rng), u(rng)).normalized();
    m.valid = true;
    m.neighbor_count = 1;

    Eigen::Matrix<double, 1, 12> J_reg;
    double r0;
    residual_reg(pt, m, state, state.tangent(), &r0, &J_reg);
    Eigen::Matrix<double, 1, 12> fd_reg;
    for (int k = 0; k < 12; ++k) {
      double rp, rm;
      const State sp = perturb(state, k, eps);
      const State sm = perturb(state, k, -eps);
      residual_reg(pt, m, sp, sp.tangent(), &rp, nullptr);
      residual_reg(pt, m, sm, sm.tangent(), &rm, nullptr);
      fd_reg(k) = (rp - rm) / (2.0 * eps);
    }
    worst = std::max(worst, rel_err(sign * J_reg, fd_reg));

    Vec6 r6;
    Eigen::Matrix<double, 6, 12> J_loc, J_vel;
    residual_loc(state, prev, &r6, &J_loc);
    residual_vel(state, prev, &r6, &J_vel);
    for (int row = 0; row < 6; ++row) {
      Eigen::RowVectorXd fd_loc(12), fd_vel(12);
      for (int k = 0; k < 12; ++k) {
        Vec6 rp, rm;
        const State sp = perturb(state, k, eps);
        const State sm = perturb(state, k, -eps);
        residual_loc(sp, prev, &rp, nullptr);
        residual_loc(sm, prev, &rm, nullptr);
        fd_loc(k) = (rp(row) - rm(row)) / (2.0 * eps);
        residual_vel(sp, prev, &rp, nullptr);
        residual_vel(sm, prev, &rm, nullptr);
        fd_vel(k) = (rp(row) - rm(row)) / (2.0 * eps);
      }
      worst = std::max(worst, rel_err(sign * J_loc.row(row), fd_loc));
      worst = std::max(worst, rel_err(sign * J_vel.row(row), fd_vel));
    }
  }
  return worst;
}

}  // namespace ctlo
