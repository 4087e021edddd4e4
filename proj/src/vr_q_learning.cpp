#include "robustq/vr_q_learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustq/bellman.hpp"

namespace robustq {

std::vector<std::size_t> VRQLParams::geometric_recentering(double m_base, std::size_t l_vr) {
  if (!(m_base > 0.0)) throw std::invalid_argument("geometric_recentering: m_base must be > 0");
  std::vector<std::size_t> m(l_vr);
  for (std::size_t l = 1; l <= l_vr; ++l) {
    m[l - 1] = static_cast<std::size_t>(std::ceil(m_base * std::pow(4.0, static_cast<double>(l))));
  }
  return m;
}

std::size_t epoch_count(double epsilon, double gamma) {
  const double x = std::log2(1.0 / (epsilon * (1.0 - gamma)));
  // Absorb rounding so that eps = (1-g)^-1 / 2^j gives exactly j epochs.
  return static_cast<std::size_t>(std::max(1.0, std::ceil(x - 1e-12)));
}

VRQLParams default_vrql_params(const TabularRMDP& model, double epsilon, double eta,
                               const RecipeConstants& constants, std::uint64_t seed) {
  const double horizon = 1.0 / (1.0 - model.gamma);
  if (!(epsilon > 0.0 && epsilon < horizon)) {
    throw std::invalid_argument("default_vrql_params: epsilon must lie in (0, 1/(1-gamma))");
  }
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::invalid_argument("default_vrql_params: eta must lie in (0,1)");
  }
  const double d = union_bound_dimension(model);
  const double p_min = min_support_probability(model);
  const double p3 = std::pow(p_min, 3);

  VRQLParams params;
  params.seed = seed;
  params.constants = constants;
  params.k_vr = static_cast<std::size_t>(std::max(1.0, std::ceil(constants.c1 * horizon * horizon)));
  params.l_vr = epoch_count(epsilon, model.gamma);
  const double log_n = std::log(8.0 * d * static_cast<double>(params.k_vr) *
                                static_cast<double>(params.l_vr) / eta);
  params.n_vr = static_cast<std::size_t>(
      std::max(1.0, std::ceil(constants.c2 * std::pow(log_n, 4) * horizon / p3)));
  const double log_m = std::log(24.0 * d / eta);
  const double m_floor = std::ceil(8.0 / (p_min * p_min) * log_m);
  params.m.resize(params.l_vr);
  for (std::size_t l = 1; l <= params.l_vr; ++l) {
    const double m_l = std::ceil(constants.c3 * std::pow(4.0, static_cast<double>(l)) * log_m *
                                 log_m * horizon * horizon / p3);
    params.m[l - 1] = static_cast<std::size_t>(std::max(m_l, m_floor));
  }
  return params;
}

std::uint64_t vrql_samples_through_epoch(const TabularRMDP& model, const VRQLParams& params,
                                         std::size_t epoch) {
  std::uint64_t per_cell = static_cast<std::uint64_t>(epoch) * params.n_vr * params.k_vr;
  for (std::size_t j = 0; j < epoch && j < params.m.size(); ++j) per_cell += params.m[j];
  return per_cell * model.n_cells();
}

namespace {

void check_params(const VRQLParams& params) {
  if (params.l_vr == 0) throw std::invalid_argument("VRQL: l_vr must be >= 1");
  if (params.k_vr == 0) throw std::invalid_argument("VRQL: k_vr must be >= 1");
  if (params.n_vr == 0) throw std::invalid_argument("VRQL: n_vr must be >= 1");
  if (params.m.size() != params.l_vr) {
    throw std::invalid_argument("VRQL: need one recentering size per epoch");
  }
  if (std::any_of(params.m.begin(), params.m.end(), [](std::size_t m) { return m == 0; })) {
    throw std::invalid_argument("VRQL: recentering sizes must be >= 1");
  }
}

VRQLResult vrql_loop(const TabularRMDP& model, const VRQLParams& params,
                     const RunOptions& options, double delta) {
  check_params(params);
  require_valid(model);
  const StepSchedule step(model.gamma);
  const std::size_t stride = options.stride == 0 ? params.k_vr : options.stride;
  const std::uint64_t cells = model.n_cells();

  VRQLResult result;
  QFunction q_hat = QFunction::zeros_like(model);
  if (options.q_star) result.epoch_errors.push_back(sup_distance(q_hat, *options.q_star));
  if (options.keep_snapshots) result.epoch_estimates.push_back(q_hat);

  std::uint64_t samples = 0;
  std::uint32_t draw = 0;
  std::size_t global_iter = 0;
  bool stopped = false;
  for (std::size_t l = 1; l <= params.l_vr && !stopped; ++l) {
    // T~_l(q_hat) is all the epoch needs from the large recentering sample.
    const QFunction anchor = [&] {
      const EmpiricalOperator recentering(
          sample_empirical_model(model, params.m[l - 1], params.seed, options.lane, draw++),
          delta, options.dual_tol);
      return recentering(q_hat);
    }();
    samples += cells * params.m[l - 1];

    QFunction q = q_hat;
    for (std::size_t k = 1; k <= params.k_vr; ++k) {
      const EmpiricalOperator op(
          sample_empirical_model(model, params.n_vr, params.seed, options.lane, draw++), delta,
          options.dual_tol);
      const QFunction at_q = op(q);
      const QFunction at_anchor = op(q_hat);
      const double lambda = step(k);
      for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = (1.0 - lambda) * q[i] + lambda * (at_q[i] - at_anchor[i] + anchor[i]);
      }
      samples += cells * params.n_vr;
      ++global_iter;
      if (k % stride == 0 || k == params.k_vr) {
        TraceRecord row;
        row.trajectory = options.lane;
        row.iteration = global_iter;
        row.epoch = l;
        row.inner_iter = k;
        row.samples = samples;
        if (options.q_star) row.error = sup_distance(q, *options.q_star);
        if (options.keep_snapshots) row.snapshot = q;
        stopped = options.stop_below && row.error && *row.error <= *options.stop_below;
        result.trace.push_back(std::move(row));
        if (stopped) break;
      }
    }
    q_hat = std::move(q);
    if (options.q_star) result.epoch_errors.push_back(sup_distance(q_hat, *options.q_star));
    if (options.keep_snapshots) result.epoch_estimates.push_back(q_hat);
  }
  result.q = std::move(q_hat);
  return result;
}

}  // namespace

VRQLResult run_vrql(const TabularRMDP& model, const VRQLParams& params,
                    const RunOptions& options) {
  return vrql_loop(model, params, options, model.delta);
}

VRQLResult run_nonrobust_vrql(const TabularRMDP& model, const VRQLParams& params,
                              const RunOptions& options) {
  return vrql_loop(model, params, options, 0.0);
}

}  // namespace robustq
