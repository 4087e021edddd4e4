#include "robustq/q_learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustq/bellman.hpp"

namespace robustq {

double union_bound_dimension(const TabularRMDP& model) {
  const double width =
      static_cast<double>(std::max(model.n_states, model.n_reward_values()));
  return static_cast<double>(model.n_cells()) * width;
}

DRQLParams default_drql_params(const TabularRMDP& model, double epsilon, double eta,
                               const RecipeConstants& constants, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("default_drql_params: epsilon must be > 0");
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::invalid_argument("default_drql_params: eta must lie in (0,1)");
  }
  const double horizon = 1.0 / (1.0 - model.gamma);
  const double d = union_bound_dimension(model);
  const double p_min = min_support_probability(model);

  const double log_k = std::log(4.0 * d * horizon / (eta * epsilon));
  const double k0 = std::ceil(constants.c1 * std::pow(horizon, 3) / epsilon * std::pow(log_k, 3));
  const double log_n = std::log(4.0 * d * k0 / eta);
  const double n0 = std::ceil(constants.c2 * log_n * log_n * horizon * horizon /
                              (std::pow(p_min, 3) * epsilon));
  DRQLParams params;
  params.k0 = static_cast<std::size_t>(std::max(1.0, k0));
  params.n0 = static_cast<std::size_t>(std::max(1.0, n0));
  params.seed = seed;
  return params;
}

std::size_t default_stride(std::size_t k0) { return std::max<std::size_t>(1, (k0 + 199) / 200); }

namespace {

LearnerResult q_learning_loop(const TabularRMDP& model, const DRQLParams& params,
                              const RunOptions& options, double delta) {
  if (params.k0 == 0 || params.n0 == 0) {
    throw std::invalid_argument("Q-learning: k0 and n0 must be >= 1");
  }
  require_valid(model);
  const StepSchedule step(model.gamma);
  const std::size_t stride = options.stride == 0 ? default_stride(params.k0) : options.stride;
  const std::uint64_t per_iteration = static_cast<std::uint64_t>(model.n_cells()) * params.n0;

  LearnerResult result;
  QFunction q = QFunction::zeros_like(model);
  for (std::size_t k = 1; k <= params.k0; ++k) {
    const EmpiricalOperator op(
        sample_empirical_model(model, params.n0, params.seed, options.lane,
                               static_cast<std::uint32_t>(k)),
        delta, options.dual_tol);
    const double lambda = step(k);
    QFunction target = op(q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = (1.0 - lambda) * q[i] + lambda * target[i];
    }
    if (k % stride == 0 || k == params.k0) {
      TraceRecord row;
      row.trajectory = options.lane;
      row.iteration = k;
      row.samples = per_iteration * k;
      if (options.q_star) row.error = sup_distance(q, *options.q_star);
      if (options.keep_snapshots) row.snapshot = q;
      const bool reached = options.stop_below && row.error && *row.error <= *options.stop_below;
      result.trace.push_back(std::move(row));
      if (reached) break;
    }
  }
  result.q = std::move(q);
  return result;
}

}  // namespace

LearnerResult run_drql(const TabularRMDP& model, const DRQLParams& params,
                       const RunOptions& options) {
  return q_learning_loop(model, params, options, model.delta);
}

LearnerResult run_standard_ql(const TabularRMDP& model, const DRQLParams& params,
                              const RunOptions& options) {
  // With delta = 0 each dual collapses to the empirical mean, so the target
  // is the n0-sample average of r + gamma v(q)(s').
  return q_learning_loop(model, params, options, 0.0);
}

}  // namespace robustq
