#include "robustq/bench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustq/oracle.hpp"
#include "robustq/parallel.hpp"

namespace robustq {

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::drql:
      return "drql";
    case Algorithm::ql:
      return "ql";
    case Algorithm::vrql:
      return "vrql";
    case Algorithm::nrvrql:
      return "nrvrql";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::drql, Algorithm::ql, Algorithm::vrql, Algorithm::nrvrql}) {
    if (algorithm_name(a) == name) return a;
  }
  return std::nullopt;
}

bool is_variance_reduced(Algorithm algorithm) {
  return algorithm == Algorithm::vrql || algorithm == Algorithm::nrvrql;
}

LearnerResult run_learner(const TabularRMDP& model, const LearnerConfig& config,
                          const RunOptions& options) {
  switch (config.algorithm) {
    case Algorithm::drql:
      return run_drql(model, config.drql, options);
    case Algorithm::ql:
      return run_standard_ql(model, config.drql, options);
    case Algorithm::vrql: {
      VRQLResult r = run_vrql(model, config.vrql, options);
      return {std::move(r.q), std::move(r.trace)};
    }
    case Algorithm::nrvrql: {
      VRQLResult r = run_nonrobust_vrql(model, config.vrql, options);
      return {std::move(r.q), std::move(r.trace)};
    }
  }
  throw std::invalid_argument("run_learner: unknown algorithm");
}

std::uint64_t total_samples(const TabularRMDP& model, const LearnerConfig& config) {
  if (is_variance_reduced(config.algorithm)) {
    return vrql_samples_through_epoch(model, config.vrql, config.vrql.l_vr);
  }
  return static_cast<std::uint64_t>(model.n_cells()) * config.drql.n0 * config.drql.k0;
}

std::vector<LearnerResult> run_trajectories(const TabularRMDP& model, const LearnerConfig& config,
                                            const RunOptions& options, std::size_t trajectories) {
  require_valid(model);
  std::vector<LearnerResult> out(trajectories);
  parallel_for(trajectories, [&](std::size_t i) {
    RunOptions lane = options;
    lane.lane = static_cast<std::uint32_t>(i);
    out[i] = run_learner(model, config, lane);
  });
  return out;
}

namespace {

LearnerConfig with_seed(LearnerConfig config, std::uint64_t seed) {
  config.drql.seed = seed;
  config.vrql.seed = seed;
  return config;
}

std::uint64_t first_iteration_cost(const TabularRMDP& model, const LearnerConfig& config) {
  const std::uint64_t cells = model.n_cells();
  if (is_variance_reduced(config.algorithm)) {
    return cells * (config.vrql.m.empty() ? 0 : config.vrql.m.front()) + cells * config.vrql.n_vr;
  }
  return cells * config.drql.n0;
}

}  // namespace

ErrorCurve error_curve(const TabularRMDP& model, const LearnerConfig& config,
                       const QFunction& q_star, const std::vector<std::uint64_t>& budgets,
                       std::size_t trajectories, std::uint64_t seed) {
  if (trajectories == 0) throw std::invalid_argument("error_curve: trajectories must be >= 1");
  if (budgets.empty()) throw std::invalid_argument("error_curve: no budgets");
  const LearnerConfig cfg = with_seed(config, seed);
  const std::uint64_t min_cost = first_iteration_cost(model, cfg);
  const std::uint64_t max_cost = total_samples(model, cfg);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] < min_cost) {
      throw std::invalid_argument("error_curve: budget " + std::to_string(budgets[i]) +
                                  " is below the cost of one iteration (" +
                                  std::to_string(min_cost) + ")");
    }
    if (budgets[i] > max_cost) {
      throw std::invalid_argument("error_curve: budget " + std::to_string(budgets[i]) +
                                  " exceeds the configured run (" + std::to_string(max_cost) + ")");
    }
    if (i > 0 && budgets[i] <= budgets[i - 1]) {
      throw std::invalid_argument("error_curve: budgets must be strictly increasing");
    }
  }

  RunOptions options;
  options.q_star = q_star;
  options.stride = 1;
  const std::vector<LearnerResult> runs = run_trajectories(model, cfg, options, trajectories);

  ErrorCurve curve;
  curve.algorithm = cfg.algorithm;
  curve.trajectories = trajectories;
  std::vector<std::vector<const TraceRecord*>> picked(trajectories);
  for (std::size_t t = 0; t < trajectories; ++t) {
    const auto& trace = runs[t].trace;
    std::size_t j = 0;
    for (std::uint64_t budget : budgets) {
      while (j + 1 < trace.size() && trace[j + 1].samples <= budget) ++j;
      picked[t].push_back(&trace[j]);
      curve.rows.push_back(trace[j]);
    }
  }
  const double k = static_cast<double>(trajectories);
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    CurvePoint point;
    point.budget = budgets[b];
    double sum2 = 0.0;
    for (std::size_t t = 0; t < trajectories; ++t) {
      const TraceRecord& row = *picked[t][b];
      const double e = *row.error;
      point.samples += static_cast<double>(row.samples) / k;
      point.error += e / k;
      point.log_error += std::log(e) / k;
      sum2 += e * e;
    }
    if (trajectories > 1) {
      const double var = std::max(0.0, (sum2 - k * point.error * point.error) / (k - 1.0));
      point.stderr_error = std::sqrt(var / k);
    }
    curve.points.push_back(point);
  }
  return curve;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points,
                          double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("fit_loglog_slope: tail fraction must lie in (0, 1]");
  }
  const auto take = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(points.size()) - 1e-9));
  if (take < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = points.size() - take; i < points.size(); ++i) {
    const auto [x, y] = points[i];
    if (!(x > 0.0 && y > 0.0)) throw std::invalid_argument("fit_loglog_slope: non-positive data");
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
  }
  const double m = static_cast<double>(take);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: x values are all equal");
  SlopeFit fit;
  fit.points = take;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += r * r;
  }
  fit.stderr_slope = take > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
  return fit;
}

SlopeFit fit_loglog_slope(const ErrorCurve& curve, double tail_fraction, bool use_log_mean) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve.points) {
    pts.emplace_back(p.samples, use_log_mean ? std::exp(p.log_error) : p.error);
  }
  return fit_loglog_slope(pts, tail_fraction);
}

SlopeFit fit_loglog_slope(const std::vector<HorizonSweepRow>& rows, double tail_fraction) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (!r.flagged()) pts.emplace_back(r.horizon, r.mean_samples);
  }
  return fit_loglog_slope(pts, tail_fraction);
}

Schedule recipe_schedule(Algorithm algorithm, const RecipeConstants& constants) {
  return [algorithm, constants](const TabularRMDP& model, double eps) {
    LearnerConfig config;
    config.algorithm = algorithm;
    if (is_variance_reduced(algorithm)) {
      config.vrql = default_vrql_params(model, eps, 0.1, constants);
    } else {
      config.drql = default_drql_params(model, eps, 0.1, constants);
    }
    return config;
  };
}

VRQLParams mixing_vrql_params(const TabularRMDP& model, double eps,
                              const RecipeConstants& constants) {
  const double horizon = 1.0 / (1.0 - model.gamma);
  VRQLParams params;
  params.constants = constants;
  params.l_vr = epoch_count(eps, model.gamma) + 2;
  params.k_vr = static_cast<std::size_t>(std::max(1.0, std::ceil(constants.c1 * horizon)));
  params.n_vr = static_cast<std::size_t>(std::max(1.0, std::ceil(constants.c2 * horizon)));
  params.m = VRQLParams::geometric_recentering(constants.c3 * horizon * horizon, params.l_vr);
  return params;
}

Schedule mixing_schedule(Algorithm algorithm, const RecipeConstants& constants) {
  if (!is_variance_reduced(algorithm)) {
    throw std::invalid_argument("mixing_schedule: only vrql and nrvrql have an epoch schedule");
  }
  return [algorithm, constants](const TabularRMDP& model, double eps) {
    LearnerConfig config;
    config.algorithm = algorithm;
    config.vrql = mixing_vrql_params(model, eps, constants);
    return config;
  };
}

std::vector<HorizonSweepRow> horizon_sweep(const std::function<TabularRMDP(double)>& builder,
                                           std::vector<double> gammas, double eps,
                                           const Schedule& schedule, std::size_t trajectories,
                                           std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("horizon_sweep: eps must be > 0");
  if (trajectories == 0) throw std::invalid_argument("horizon_sweep: trajectories must be >= 1");
  std::sort(gammas.begin(), gammas.end());
  std::vector<HorizonSweepRow> rows;
  for (double gamma : gammas) {
    const TabularRMDP model = builder(gamma);
    const LearnerConfig config = with_seed(schedule(model, eps), seed);
    // Nonrobust learners target the nonrobust fixed point.
    const bool nonrobust =
        config.algorithm == Algorithm::ql || config.algorithm == Algorithm::nrvrql;
    const FixedPointResult fp =
        solve_fixed_point(nonrobust ? model.with_delta(0.0) : model, 1e-10);
    if (!fp.converged) throw std::runtime_error("horizon_sweep: oracle did not converge");

    RunOptions options;
    options.q_star = fp.q_star;
    options.stride = 1;
    options.stop_below = eps;
    const std::vector<LearnerResult> runs = run_trajectories(model, config, options, trajectories);

    HorizonSweepRow row;
    row.gamma = gamma;
    row.horizon = 1.0 / (1.0 - gamma);
    row.eps = eps;
    row.trajectories = trajectories;
    for (const auto& run : runs) {
      const TraceRecord& last = run.trace.back();
      if (!(*last.error <= eps)) ++row.misses;
      row.mean_samples += static_cast<double>(last.samples) / static_cast<double>(trajectories);
    }
    rows.push_back(row);
  }
  return rows;
}

DRQLParams drql_for_budget(const TabularRMDP& model, std::uint64_t budget, std::size_t n0,
                           std::uint64_t seed) {
  if (n0 == 0) throw std::invalid_argument("drql_for_budget: n0 must be >= 1");
  const std::uint64_t per_iteration = static_cast<std::uint64_t>(model.n_cells()) * n0;
  if (budget < per_iteration) {
    throw std::invalid_argument("drql_for_budget: budget is below the cost of one iteration");
  }
  return {static_cast<std::size_t>(budget / per_iteration), n0, seed};
}

PairedComparison compare_final(const TabularRMDP& model, const LearnerConfig& a,
                               const LearnerConfig& b, const QFunction& q_star,
                               std::size_t trajectories) {
  if (trajectories == 0) throw std::invalid_argument("compare_final: trajectories must be >= 1");
  RunOptions options;
  options.q_star = q_star;
  const auto runs_a = run_trajectories(model, a, options, trajectories);
  const auto runs_b = run_trajectories(model, b, options, trajectories);
  PairedComparison out;
  out.samples_a = total_samples(model, a);
  out.samples_b = total_samples(model, b);
  const double k = static_cast<double>(trajectories);
  for (std::size_t t = 0; t < trajectories; ++t) {
    const double ea = *runs_a[t].trace.back().error;
    const double eb = *runs_b[t].trace.back().error;
    out.errors_a.push_back(ea);
    out.errors_b.push_back(eb);
    if (ea <= eb) ++out.wins_a;
    out.mean_a += ea / k;
    out.mean_b += eb / k;
  }
  return out;
}

}  // namespace robustq
