#pragma once

#include <limits>
#include <span>
#include <vector>

namespace robustq {

/// One KL-robust expectation: inf { E_p[u] : KL(p || mu) <= delta }.
/// `probs` is the reference measure over atoms, `values` the integrand u on
/// the same atoms. Zero-mass atoms are allowed and ignored.
struct DualProblem {
  std::span<const double> probs;
  std::span<const double> values;
  double delta = 0.0;
};

struct DualSolution {
  double value = 0.0;
  /// Maximizing multiplier. +infinity when delta == 0 (see `nonrobust`).
  double alpha_star = 0.0;
  /// Adversarial measure on the reference atoms.
  std::vector<double> worst_case;
  double kl_to_reference = 0.0;
  /// Optimum sits at alpha = 0: value equals the essential infimum.
  bool at_boundary_zero = false;
  /// delta == 0: value is the plain expectation.
  bool nonrobust = false;
};

inline constexpr double kDefaultDualTol = 1e-10;

/// f(alpha) = -alpha log E_mu[exp(-u/alpha)] - alpha delta, with the
/// alpha -> 0 limit (essinf u) at alpha == 0.
double dual_objective(const DualProblem& problem, double alpha);

/// sup_{alpha >= 0} f(alpha) together with the maximizer and the worst-case
/// tilted measure. Throws std::invalid_argument for tol <= 0.
DualSolution solve_dual(const DualProblem& problem, double tol = kDefaultDualTol);

/// Value-only variant of solve_dual for operator hot loops.
double dual_value(const DualProblem& problem, double tol = kDefaultDualTol);

/// Exponential tilt mu[.] * exp(-u/alpha) / normalizer. alpha must be > 0.
std::vector<double> worst_case_measure(const DualProblem& problem, double alpha);

/// KL(p || mu) over the shared atoms; +infinity if p charges a mu-null atom.
double kl_divergence(std::span<const double> p, std::span<const double> mu);

struct PrimalDiagnostics {
  /// E_{mu*}[u] - value.
  double mean_gap = 0.0;
  /// |KL(mu* || mu) - delta|; only meaningful when alpha* > 0.
  double kl_gap = 0.0;
  bool interior = false;
  /// alpha* == 0 branch: value equals essinf u.
  bool essinf_confirmed = false;
  bool passed = false;
};

/// Checks strong duality (worst-case mean equals dual value) and, for an
/// interior multiplier, that the KL constraint binds. Passes when the gaps
/// are within 10 * tol.
PrimalDiagnostics primal_check(const DualProblem& problem, const DualSolution& solution,
                               double tol = kDefaultDualTol);

}  // namespace robustq
