#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "robustq/kl_dual.hpp"
#include "robustq/model.hpp"

namespace robustq {

/// Rescaled linear stepsize lambda_k = 1 / (1 + (1 - gamma) k).
class StepSchedule {
 public:
  explicit StepSchedule(double gamma) : gamma_(gamma) {}
  double operator()(std::size_t k) const {
    return 1.0 / (1.0 + (1.0 - gamma_) * static_cast<double>(k));
  }
  double gamma() const { return gamma_; }

 private:
  double gamma_;
};

struct DRQLParams {
  std::size_t k0 = 1;  // iterations
  std::size_t n0 = 1;  // draws per (s, a) per iteration
  std::uint64_t seed = 0;
};

/// Absolute constants of the parameter recipes. Their values are not pinned
/// by the theory; 1 is the default.
struct RecipeConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

/// d = |S||A| max(|S|, |R|), the union-bound dimension in the log terms.
double union_bound_dimension(const TabularRMDP& model);

/// Iteration count and batch size that drive the DR Q-learning error below
/// epsilon with probability 1 - eta:
///   k0 = c1 (1-g)^-3 eps^-1 log(4d / ((1-g) eta eps))^3
///   n0 = c2 log(4 d k0 / eta)^2 / (p_min^3 (1-g)^2 eps)
DRQLParams default_drql_params(const TabularRMDP& model, double epsilon, double eta,
                               const RecipeConstants& constants = {}, std::uint64_t seed = 0);

/// One row of a learner trace.
struct TraceRecord {
  std::size_t trajectory = 0;
  std::size_t iteration = 0;   // DRQL: k; VRQL: global inner-iteration count
  std::size_t epoch = 0;       // VRQL only
  std::size_t inner_iter = 0;  // VRQL only
  std::uint64_t samples = 0;
  std::optional<double> error;
  std::optional<QFunction> snapshot;
};

struct RunOptions {
  /// Reference fixed point; when set, each trace row carries the sup-norm
  /// error against it.
  std::optional<QFunction> q_star;
  /// Trace row every `stride` iterations (0 selects the learner default).
  std::size_t stride = 0;
  /// Trajectory index; selects the RNG lane.
  std::uint32_t lane = 0;
  bool keep_snapshots = false;
  /// Stop at the first trace row whose error is at most this value
  /// (requires q_star).
  std::optional<double> stop_below;
  double dual_tol = kDefaultDualTol;
};

struct LearnerResult {
  QFunction q;
  std::vector<TraceRecord> trace;
};

/// Default DRQL checkpoint stride, ceil(k0 / 200).
std::size_t default_stride(std::size_t k0);

/// DR Q-learning: q_1 = 0, q_{k+1} = (1 - l_k) q_k + l_k T_{k+1}(q_k) with a
/// fresh n0-sample empirical operator per iteration.
LearnerResult run_drql(const TabularRMDP& model, const DRQLParams& params,
                       const RunOptions& options = {});

/// Classical synchronous Q-learning with n0-sample mean targets
/// r + gamma v(q_k)(s'); ignores model.delta.
LearnerResult run_standard_ql(const TabularRMDP& model, const DRQLParams& params,
                              const RunOptions& options = {});

}  // namespace robustq
