#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "robustq/q_learning.hpp"
#include "robustq/vr_q_learning.hpp"

namespace robustq {

enum class Algorithm { drql, ql, vrql, nrvrql };

std::string_view algorithm_name(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// True for the epoch-based learners (vrql, nrvrql).
bool is_variance_reduced(Algorithm algorithm);

/// A learner and its parameters; only the member matching the algorithm
/// family is read.
struct LearnerConfig {
  Algorithm algorithm = Algorithm::drql;
  DRQLParams drql;
  VRQLParams vrql;
};

/// Runs one trajectory. The result's trace is in the learner's own format.
LearnerResult run_learner(const TabularRMDP& model, const LearnerConfig& config,
                          const RunOptions& options);

/// Samples consumed by a complete run.
std::uint64_t total_samples(const TabularRMDP& model, const LearnerConfig& config);

/// Runs `trajectories` lanes (0, 1, ...) in parallel; slot i holds lane i.
std::vector<LearnerResult> run_trajectories(const TabularRMDP& model, const LearnerConfig& config,
                                            const RunOptions& options, std::size_t trajectories);

struct CurvePoint {
  std::uint64_t budget = 0;
  double samples = 0.0;    // mean samples actually used at the checkpoint
  double error = 0.0;      // mean sup-norm error
  double log_error = 0.0;  // mean of log error
  double stderr_error = 0.0;
};

struct ErrorCurve {
  Algorithm algorithm = Algorithm::drql;
  std::size_t trajectories = 0;
  std::vector<CurvePoint> points;
  /// Checkpoint rows per trajectory, in trajectory then budget order.
  std::vector<TraceRecord> rows;
};

/// Each trajectory is one full run traced at every iteration. For every
/// budget the error is read at the last iteration whose cumulative sample
/// count does not exceed it. Budgets must be strictly increasing, at least
/// one iteration's cost and at most the cost of the full run.
ErrorCurve error_curve(const TabularRMDP& model, const LearnerConfig& config,
                       const QFunction& q_star, const std::vector<std::uint64_t>& budgets,
                       std::size_t trajectories, std::uint64_t seed);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

/// Least squares of log y on log x over the last ceil(tail_fraction * size)
/// points. Needs at least 3 points in the window and positive data.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points,
                          double tail_fraction = 0.5);

/// Curve fit on (samples, mean error), or on (samples, exp(mean log error))
/// when use_log_mean is set.
SlopeFit fit_loglog_slope(const ErrorCurve& curve, double tail_fraction = 0.5,
                          bool use_log_mean = false);

struct HorizonSweepRow {
  double gamma = 0.0;
  double horizon = 0.0;
  double eps = 0.0;
  double mean_samples = 0.0;
  std::size_t trajectories = 0;
  /// Trajectories whose run ended before reaching eps.
  std::size_t misses = 0;
  bool flagged() const { return misses > 0; }
};

/// Fit on (horizon, mean samples) over the unflagged rows.
SlopeFit fit_loglog_slope(const std::vector<HorizonSweepRow>& rows, double tail_fraction = 1.0);

/// Parameters for one member of a model family at target accuracy eps.
using Schedule = std::function<LearnerConfig(const TabularRMDP& model, double eps)>;

/// Parameter recipes of the algorithms (default_drql_params /
/// default_vrql_params with eta = 0.1).
Schedule recipe_schedule(Algorithm algorithm, const RecipeConstants& constants);

/// Epoch parameters for fast-mixing families:
///   k_vr = c1 (1-g)^-1, n_vr = c2 (1-g)^-1, m_l = c3 4^l (1-g)^-2,
/// with two epochs beyond epoch_count(eps, gamma).
VRQLParams mixing_vrql_params(const TabularRMDP& model, double eps,
                              const RecipeConstants& constants);
Schedule mixing_schedule(Algorithm algorithm, const RecipeConstants& constants);

/// For each gamma (sorted ascending), builds the model, solves q* to
/// 1e-10, and runs `trajectories` lanes until the first trace row with error
/// at most eps. Rows with any trajectory that never got there are flagged.
std::vector<HorizonSweepRow> horizon_sweep(const std::function<TabularRMDP(double)>& builder,
                                           std::vector<double> gammas, double eps,
                                           const Schedule& schedule, std::size_t trajectories,
                                           std::uint64_t seed);

/// DRQL with batch n0 and as many iterations as fit in `budget`.
DRQLParams drql_for_budget(const TabularRMDP& model, std::uint64_t budget, std::size_t n0,
                           std::uint64_t seed);

struct PairedComparison {
  std::vector<double> errors_a;
  std::vector<double> errors_b;
  std::uint64_t samples_a = 0;
  std::uint64_t samples_b = 0;
  /// Pairs with error_a <= error_b.
  std::size_t wins_a = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Final-checkpoint errors of two learners on the same lanes.
PairedComparison compare_final(const TabularRMDP& model, const LearnerConfig& a,
                               const LearnerConfig& b, const QFunction& q_star,
                               std::size_t trajectories);

}  // namespace robustq
