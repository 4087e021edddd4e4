#pragma once

#include <cstddef>

#include "robustq/kl_dual.hpp"
#include "robustq/model.hpp"

namespace robustq {

struct FixedPointResult {
  QFunction q_star;
  std::size_t iterations = 0;
  /// ||T(q) - q||_inf of the returned q.
  double residual = 0.0;
  /// Certified bound on ||q - q*||_inf from the contraction argument.
  double error_bound = 0.0;
  bool converged = false;
};

inline constexpr double kDefaultOracleTol = 1e-9;
inline constexpr std::size_t kDefaultOracleMaxIter = 1'000'000;

/// Value iteration q <- T(q) from q = 0 with the exact robust operator.
/// Stops once a step is at most tol (1 - gamma) / gamma, which bounds the
/// distance to the fixed point by tol.
FixedPointResult solve_fixed_point(const TabularRMDP& model, double tol = kDefaultOracleTol,
                                   std::size_t max_iter = kDefaultOracleMaxIter,
                                   double dual_tol = kDefaultDualTol);

/// Classical (delta = 0) counterpart.
FixedPointResult nonrobust_fixed_point(const TabularRMDP& model,
                                       double tol = kDefaultOracleTol,
                                       std::size_t max_iter = kDefaultOracleMaxIter);

/// Robust value of a fixed policy: fixed point of
/// v(s) = T(q)(s, pi(s)) with the worst case taken per (s, pi(s)).
std::vector<double> evaluate_policy_robust(const TabularRMDP& model, const Policy& policy,
                                           double tol = kDefaultOracleTol);

}  // namespace robustq
