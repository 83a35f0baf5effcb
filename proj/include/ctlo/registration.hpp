#pragma once

#include <vector>

#include "ctlo/motion.hpp"
#include "ctlo/range_image.hpp"
#include "ctlo/se3.hpp"

namespace ctlo {

struct RegistrationConfig {
  double sigma = 0.25;          // per-axis Gaussian std-dev (m)
  double outlier_weight = 0.2;  // w_i
  int window = 7;               // patch side length, odd
  double lambda_loc = 0.1;
  double lambda_vel = 0.1;
  int max_em_iters = 30;
  double convergence_eps = 1e-6;
  double delta_sigma = 0.055;   // curvature threshold
  bool ct_enabled = true;       // false: rigid registration, alpha forced to 0
  bool gmm_enabled = true;      // false: single-nearest-pixel point-to-plane
  int workers = 1;
  bool deterministic = true;    // fixed-order reductions and seeding
};

/// Filter-correspondence moments for one scan point.
struct Moments {
  double m0 = 0;
  Vec3 m1{Vec3::Zero()};
  Vec3 n{Vec3::Zero()};
  int neighbor_count = 0;  // J, valid contributing neighbors
  bool valid = false;
};

struct GNSystem {
  Eigen::Matrix<double, 12, 12> H = Eigen::Matrix<double, 12, 12>::Zero();
  Eigen::Matrix<double, 12, 1> b = Eigen::Matrix<double, 12, 1>::Zero();
  double E = 0;
  std::size_t valid_points = 0;
};

struct RegistrationDiagnostics {
  int iterations = 0;
  double objective_initial = 0;
  double objective_final = 0;
  double inlier_ratio = 0;
  bool diverged = false;
};

/// E-step windowed Gaussian transform for one point (map-origin frame).
Moments gaussian_moments(const Vec3& p_local, const VertexNormalMaps& maps,
                         const RangeImageMap& map, const RegistrationConfig& cfg);

/// Point-to-plane residual and its 1x12 Jacobian w.r.t. right perturbations
/// of (T_b, T_e). `tau` must be state.tangent().
void residual_reg(const ScanPoint& p_raw, const Moments& moments, const State& state,
                  const Twist& tau, double* r, Eigen::Matrix<double, 1, 12>* J);

void residual_loc(const State& state, const State& prev, Vec6* r,
                  Eigen::Matrix<double, 6, 12>* J);

void residual_vel(const State& state, const State& prev, Vec6* r,
                  Eigen::Matrix<double, 6, 12>* J);

/// Accumulates the weighted normal equations for one linearization point.
GNSystem build_system(const Scan& scan, const std::vector<Moments>& moments,
                      const State& state, const State& prev, const RegistrationConfig& cfg);

struct SolveResult {
  State state;
  double step_norm = 0;
  bool ok = false;
};

/// Solves H ds = -b with Levenberg damping and applies the right-update.
SolveResult solve_and_update(const GNSystem& system, const State& state,
                             const RegistrationConfig& cfg);

/// EM loop: moments (E step) then one damped Gauss-Newton step (M step).
State register_scan(const Scan& scan, const RangeImageMap& map, const VertexNormalMaps& maps,
                    const State& prev, const RegistrationConfig& cfg,
                    RegistrationDiagnostics* diag = nullptr);

}  // namespace ctlo
