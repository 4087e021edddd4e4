#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "robustq/bellman.hpp"
#include "robustq/model.hpp"

namespace robustq {

/// Monte Carlo bias and variance of the empirical operator at one n.
/// Vectors are indexed by cell (s * |A| + a).
struct BiasVarianceRow {
  std::size_t n = 0;
  /// E[T_n(q)] - T(q), estimated with a first-order control variate.
  std::vector<double> bias;
  /// Plain sample mean of T_n(q) - T(q).
  std::vector<double> raw_bias;
  std::vector<double> variance;
  std::vector<double> stderr_bias;
  std::vector<double> stderr_variance;
  /// Per-cell variance and bias ceilings with constants 104 and 4480.
  std::vector<double> variance_ceiling;
  std::vector<double> bias_ceiling;

  double sup_bias() const;
  double sup_variance() const;
  bool within_ceilings() const;
};

struct BiasVarianceTable {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t reps = 0;
  /// Whether delta is below the adversary power limit of the model; the
  /// bias ceiling is only claimed under that condition.
  bool small_adversary = false;
  std::vector<BiasVarianceRow> rows;
};

/// For each n, draws `reps` empirical models (rep r on lane r, step = index
/// of n in n_list) and compares T_n(q) with the exact operator.
///
/// The bias column subtracts sum_i (mu_n,i - mu_i) h_i from each replicate,
/// where h is the derivative of the dual value in the reference masses:
/// h_i = -alpha* mu*_i / mu_i for an interior multiplier, u_i for delta = 0
/// and 0 when alpha* = 0. The term has mean zero, so the estimator stays
/// unbiased while its noise drops from O(n^-1/2) to O(n^-1).
BiasVarianceTable estimate_bias_variance(const TabularRMDP& model, const QFunction& q,
                                         const std::vector<std::size_t>& n_list,
                                         std::size_t reps, std::uint64_t seed);

/// One (q1, q2) comparison under a fixed sampled operator.
struct ContractionSample {
  /// ||T q1 - T q2|| / ||q1 - q2||; empty when q1 == q2.
  std::optional<double> ratio;
  /// T(min(q1, q2)) <= T(max(q1, q2)) + 1e-9 entrywise.
  bool monotone = true;
};

ContractionSample probe_pair(const EmpiricalOperator& op, const QFunction& q1,
                             const QFunction& q2);

struct ContractionReport {
  double gamma = 0.0;
  std::size_t trials = 0;
  std::size_t skipped = 0;
  std::size_t monotonicity_violations = 0;
  double max_ratio = 0.0;
  bool passed = false;
};

/// Random q1, q2 with entries uniform on [0, 1/(1-gamma)] and a fresh
/// n-sample operator per trial.
ContractionReport contraction_probe(const TabularRMDP& model, std::size_t n, std::size_t trials,
                                    std::uint64_t seed);

struct RecenteredReport {
  std::size_t n = 0;
  double b = 0.0;
  double eta = 0.0;
  std::size_t trials = 0;
  /// n >= 8 p^-2 log(4 |S|^2 |A| / eta).
  bool proviso_met = false;
  /// ||H(q) - H_n(q)|| above 6 g ||q - q*|| / (p^1.5 sqrt n) sqrt(log(4|S|^2|A|/eta)).
  std::size_t exceedances = 0;
  double exceedance_rate = 0.0;
  double binomial_stderr = 0.0;
  double max_statistic = 0.0;
  /// Largest statistic / threshold over trials with q != q*.
  double max_threshold_ratio = 0.0;
  /// Same count for ||T_n(q) - T(q)|| against
  /// 17 (r_max + g sp(q)) / (p sqrt n) sqrt(log(6 |S||A| (|S| v |R|) / eta)).
  bool plain_proviso_met = false;
  std::size_t plain_exceedances = 0;
  double plain_exceedance_rate = 0.0;
  /// exceedance_rate <= eta + 3 binomial_stderr (same for the plain bound).
  bool passed = false;
};

/// q is drawn as q* plus independent uniform[-b, b] entries.
RecenteredReport recentered_probe(const TabularRMDP& model, const QFunction& q_star, double b,
                                  std::size_t n, std::size_t trials, std::uint64_t seed,
                                  double eta = 0.1);

}  // namespace robustq
