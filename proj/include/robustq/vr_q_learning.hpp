#pragma once

#include <cstdint>
#include <vector>

#include "robustq/q_learning.hpp"

namespace robustq {

struct VRQLParams {
  std::size_t l_vr = 1;        // epochs
  std::size_t k_vr = 1;        // inner iterations per epoch
  std::size_t n_vr = 1;        // inner batch size per (s, a)
  std::vector<std::size_t> m;  // recentering sample sizes m_1..m_{l_vr}
  std::uint64_t seed = 0;
  RecipeConstants constants;

  /// m_l = ceil(m_base * 4^l) for l = 1..l_vr.
  static std::vector<std::size_t> geometric_recentering(double m_base, std::size_t l_vr);
};

/// Epoch count l_vr = ceil(log2(1 / (eps (1 - gamma)))).
std::size_t epoch_count(double epsilon, double gamma);

/// Parameter recipe of the variance-reduced algorithm:
///   k_vr = c1 (1-g)^-2
///   n_vr = c2 log(8 d k_vr l_vr / eta)^4 / (p_min^3 (1-g))
///   m_l  = c3 4^l log(24 d / eta)^2 / (p_min^3 (1-g)^2),
/// with m_l raised to at least 8 p_min^-2 log(24 d / eta).
/// Requires 0 < epsilon < 1 / (1 - gamma).
VRQLParams default_vrql_params(const TabularRMDP& model, double epsilon, double eta,
                               const RecipeConstants& constants = {}, std::uint64_t seed = 0);

/// |S||A| (l n_vr k_vr + sum_{j<=l} m_j): samples consumed through epoch l.
std::uint64_t vrql_samples_through_epoch(const TabularRMDP& model, const VRQLParams& params,
                                         std::size_t epoch);

struct VRQLResult {
  QFunction q;
  std::vector<TraceRecord> trace;
  /// ||q_hat_l - q*||_inf for l = 0..l_vr (empty without a reference).
  std::vector<double> epoch_errors;
  std::vector<QFunction> epoch_estimates;
};

/// Variance-reduced DR Q-learning. Each epoch l draws an m_l-sample
/// operator T~_l and caches T~_l(q_hat); each inner step draws one n_vr-sample
/// operator T and uses it for both T(q) and T(q_hat):
///   q <- (1 - l_k) q + l_k (T(q) - T(q_hat) + T~_l(q_hat)).
/// Trace rows are written every `stride` inner iterations (default k_vr)
/// and at the end of each epoch.
VRQLResult run_vrql(const TabularRMDP& model, const VRQLParams& params,
                    const RunOptions& options = {});

/// Same recursion with delta = 0 (expectation operators).
VRQLResult run_nonrobust_vrql(const TabularRMDP& model, const VRQLParams& params,
                              const RunOptions& options = {});

}  // namespace robustq
