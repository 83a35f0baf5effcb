#include "ctlo/registration.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "ctlo/parallel.hpp"

#include <limits>

namespace ctlo {

namespace {
// EM iterations allowed without improving the best objective before stopping
constexpr int kStagnationWindow = 5;
}  // namespace

Moments gaussian_moments(const Vec3& p_local, const VertexNormalMaps& maps,
                         const RangeImageMap& map, const RegistrationConfig& cfg) {
  Moments out;
  const PixelCoord px = project(p_local, map.params());
  if (!px.in_bounds) return out;

  if (!cfg.gmm_enabled) {
    // Single-nearest-pixel point-to-plane association.
    if (!maps.normal_at(px.u, px.v)) return out;
    const std::size_t i = maps.idx(px.u, px.v);
    out.m0 = 1.0;
    out.m1 = maps.vertex[i];
    out.n = maps.normal[i];
    out.neighbor_count = 1;
    out.valid = true;
    return out;
  }

  const int half = cfg.window / 2;
  const double inv_two_var = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double norm_const = std::pow(2.0 * M_PI * cfg.sigma * cfg.sigma, -1.5);

  double m0 = 0;
  Vec3 m1 = Vec3::Zero();
  Vec3 nsum = Vec3::Zero();
  int count = 0;
  for (int dv = -half; dv <= half; ++dv) {
    const int v = px.v + dv;
    if (v < 0 || v >= maps.height) continue;
    for (int du = -half; du <= half; ++du) {
      const int u = px.u + du;
      if (u < 0 || u >= maps.width || !maps.normal_at(u, v)) continue;
      const std::size_t i = maps.idx(u, v);
      const Vec3& q = maps.vertex[i];
      const double density = norm_const * std::exp(-(p_local - q).squaredNorm() * inv_two_var);
      m0 += density;
      m1 += density * q;
      nsum += density * maps.normal[i];
      ++count;
    }
  }
  if (count == 0 || m0 <= 0 || nsum.norm() < 1e-12) return out;
  out.m0 = m0;
  out.m1 = m1;
  out.n = nsum.normalized();
  out.neighbor_count = count;
  out.valid = true;
  return out;
}

void residual_reg(const ScanPoint& p_raw, const Moments& moments, const State& state,
                  const Twist& tau, double* r, Eigen::Matrix<double, 1, 12>* J) {
  const double alpha =
      std::clamp((p_raw.t - state.t_b) / (state.t_e - state.t_b), 0.0, 1.0);
  const Pose T_i = state.T_b * exp(tau * alpha);
  const Vec3 p_world = T_i * p_raw.position;
  *r = moments.n.dot(p_world - moments.m1 / moments.m0);

  if (J == nullptr) return;
  // d(T_i p)/dT_i under right perturbation: [R_i, -R_i [p]x]
  Eigen::Matrix<double, 1, 6> dr_dxi;
  dr_dxi.head<3>() = moments.n.transpose() * T_i.rotation;
  dr_dxi.tail<3>() = -moments.n.transpose() * T_i.rotation * skew(p_raw.position);

  // chain as row-vector times matrix: two 1x6*6x6 products per factor instead
  // of a full 6x6*6x6 product
  J->leftCols<6>() =
      (1.0 - alpha) * ((dr_dxi * right_jacobian(tau * (alpha - 1.0))) * left_jacobian_inv(tau));
  J->rightCols<6>() = alpha * ((dr_dxi * right_jacobian(tau * alpha)) * right_jacobian_inv(tau));
}

void residual_loc(const State& state, const State& prev, Vec6* r,
                  Eigen::Matrix<double, 6, 12>* J) {
  const Twist r_loc = ominus(state.T_b, prev.T_e);
  *r = r_loc.vec();
  if (J != nullptr) {
    J->setZero();
    J->leftCols<6>() = right_jacobian_inv(r_loc);
  }
}

void residual_vel(const State& state, const State& prev, Vec6* r,
                  Eigen::Matrix<double, 6, 12>* J) {
  const Twist tau = state.tangent();
  const Twist tau_prev = ominus(prev.T_e, prev.T_b);
  *r = (tau - tau_prev).vec();
  if (J != nullptr) {
    J->leftCols<6>() = -left_jacobian_inv(tau);
    J->rightCols<6>() = right_jacobian_inv(tau);
  }
}

GNSystem build_system(const Scan& scan, const std::vector<Moments>& moments,
                      const State& state, const State& prev, const RegistrationConfig& cfg) {
  GNSystem sys;
  const std::size_t M = scan.points.size();
  const Twist tau = state.tangent();
  const double w = cfg.outlier_weight;
  const double outlier_ratio = w / (1.0 - w);

  struct Partial {
    Eigen::Matrix<double, 12, 12> H = Eigen::Matrix<double, 12, 12>::Zero();
    Eigen::Matrix<double, 12, 1> b = Eigen::Matrix<double, 12, 1>::Zero();
    double E = 0;
    std::size_t valid = 0;
  };

  auto accumulate = [&](std::size_t i, Partial& p) {
    if (!moments[i].valid) return;
    ScanPoint pt = scan.points[i];
    if (!cfg.ct_enabled) pt.t = state.t_b;
    double r;
    Eigen::Matrix<double, 1, 12> J;
    residual_reg(pt, moments[i], state, tau, &r, &J);
    const double c = outlier_ratio * static_cast<double>(moments[i].neighbor_count) / M;
    const double robust = cfg.gmm_enabled ? moments[i].m0 / (moments[i].m0 + c) : 1.0;
    const double weight = robust / static_cast<double>(M);
    p.H.noalias() += weight * J.transpose() * J;
    p.b.noalias() += weight * J.transpose() * r;
    p.E += weight * r * r;
    ++p.valid;
  };

  // the parallel reduction is deterministic as-is: parallel_for partitions
  // statically and the partials are combined in fixed worker order
  if (cfg.workers <= 1 || M < 256) {
    Partial p;
    for (std::size_t i = 0; i < M; ++i) accumulate(i, p);
    sys.H = p.H;
    sys.b = p.b;
    sys.E = p.E;
    sys.valid_points = p.valid;
  } else {
    const std::size_t nw = static_cast<std::size_t>(cfg.workers);
    std::vector<Partial> partials(nw);
    const std::size_t chunk = (M + nw - 1) / nw;
    parallel_for(nw, cfg.workers, [&](std::size_t wi) {
      const std::size_t begin = wi * chunk;
      const std::size_t end = std::min(M, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) accumulate(i, partials[wi]);
    });
    for (const Partial& p : partials) {
      sys.H += p.H;
      sys.b += p.b;
      sys.E += p.E;
      sys.valid_points += p.valid;
    }
  }

  Vec6 r_loc, r_vel;
  Eigen::Matrix<double, 6, 12> J_loc, J_vel;
  residual_loc(state, prev, &r_loc, &J_loc);
  residual_vel(state, prev, &r_vel, &J_vel);
  sys.H.noalias() += cfg.lambda_loc * J_loc.transpose() * J_loc;
  sys.b.noalias() += cfg.lambda_loc * J_loc.transpose() * r_loc;
  sys.E += cfg.lambda_loc * r_loc.squaredNorm();
  sys.H.noalias() += cfg.lambda_vel * J_vel.transpose() * J_vel;
  sys.b.noalias() += cfg.lambda_vel * J_vel.transpose() * r_vel;
  sys.E += cfg.lambda_vel * r_vel.squaredNorm();
  return sys;
}

SolveResult solve_and_update(const GNSystem& system, const State& state,
                             const RegistrationConfig& cfg) {
  SolveResult out;
  out.state = state;
  if (system.H.norm() == 0) return out;

  const double b_norm = system.b.norm();
  for (double mu = 1e-6; mu <= 1e-2 + 1e-15; mu *= 10.0) {
    Eigen::Matrix<double, 12, 12> Hd = system.H;
    Hd.diagonal() += mu * system.H.diagonal();
    Eigen::LDLT<Eigen::Matrix<double, 12, 12>> ldlt(Hd);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::Matrix<double, 12, 1> ds = ldlt.solve(-system.b);
    if (!ds.allFinite()) continue;
    if ((Hd * ds + system.b).norm() > 1e-9 * std::max(b_norm, 1e-300)) continue;
    out.state.T_b = oplus(state.T_b, Twist(ds.head<6>()));
    out.state.T_e = oplus(state.T_e, Twist(ds.tail<6>()));
    out.step_norm = ds.norm();
    out.ok = true;
    return out;
  }
  return out;
}

namespace {

std::vector<Moments> compute_moments(const Scan& scan, const State& state,
                                     const RangeImageMap& map, const VertexNormalMaps& maps,
                                     const RegistrationConfig& cfg) {
  const Twist tau = state.tangent();
  const double inv_len = 1.0 / (state.t_e - state.t_b);
  const Pose inv_origin = map.origin().inverse();
  std::vector<Moments> moments(scan.points.size());
  parallel_for(scan.points.size(), cfg.workers, [&](std::size_t i) {
    const ScanPoint& pt = scan.points[i];
    double alpha = cfg.ct_enabled ? std::clamp((pt.t - state.t_b) * inv_len, 0.0, 1.0) : 0.0;
    const Vec3 p_world = (state.T_b * exp(tau * alpha)) * pt.position;
    Moments m = gaussian_moments(inv_origin * p_world, maps, map, cfg);
    if (m.valid) {
      // lift the centroid and normal from map-origin frame into world frame,
      // where the residual is evaluated
      m.m1 = m.m0 * (map.origin() * (m.m1 / m.m0));
      m.n = map.origin().rotation * m.n;
    }
    moments[i] = m;
  });
  return moments;
}

}  // namespace

State register_scan(const Scan& scan, const RangeImageMap& map, const VertexNormalMaps& maps,
                    const State& prev, const RegistrationConfig& cfg,
                    RegistrationDiagnostics* diag) {
  RegistrationDiagnostics local;
  RegistrationDiagnostics& d = diag ? *diag : local;
  d = RegistrationDiagnostics{};

  const State prediction = predict_state(prev, scan.t_b, scan.t_e);
  State state = prediction;
  const std::size_t M = scan.points.size();
  if (M == 0) {
    d.diverged = true;
    return prediction;
  }

  // The E-step re-associates through a pixel grid, so the objective surface
  // shifts discretely between iterations and the iterates can wander in a
  // limit cycle instead of settling. Track the best objective seen and stop
  // once it stops improving; the returned state is the best iterate, which
  // also guarantees the objective never ends above its initial value.
  State best_state = state;
  double best_e = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  for (int iter = 0; iter < cfg.max_em_iters; ++iter) {
    const std::vector<Moments> moments = compute_moments(scan, state, map, maps, cfg);
    std::size_t valid = 0;
    for (const Moments& m : moments) valid += m.valid;
    d.inlier_ratio = static_cast<double>(valid) / static_cast<double>(M);
    if (d.inlier_ratio < 0.1) {
      d.diverged = true;
      return prediction;
    }

    const GNSystem sys = build_system(scan, moments, state, prev, cfg);
    if (iter == 0) d.objective_initial = sys.E;
    if (sys.E < best_e) {
      best_e = sys.E;
      best_state = state;
      best_iter = iter;
    }

    const SolveResult step = solve_and_update(sys, state, cfg);
    if (!step.ok) {
      d.diverged = true;
      return prediction;
    }
    state = step.state;
    d.iterations = iter + 1;
    if (step.step_norm < cfg.convergence_eps) break;
    if (iter - best_iter >= kStagnationWindow) break;
  }

  // Objective at the accepted state, with fresh associations.
  const std::vector<Moments> moments = compute_moments(scan, best_state, map, maps, cfg);
  const GNSystem last = build_system(scan, moments, best_state, prev, cfg);
  d.objective_final = std::min(best_e, last.E);
  return best_state;
}

}  // namespace ctlo
