#pragma once

#include <cstdint>

namespace ctlo {

/// Central finite-difference audit of the three analytic residual Jacobians
/// over random configurations. Returns the worst relative error seen.
/// flip_sign corrupts the analytic Jacobians, as a self-test of the audit.
double jacobian_audit_max_rel_err(std::uint64_t seed, int trials, bool flip_sign = false);

}  // namespace ctlo
