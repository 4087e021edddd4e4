#include "robustq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustq/parallel.hpp"
#include "robustq/rng.hpp"

namespace robustq {

namespace {

constexpr double kMonotoneSlack = 1e-9;

// Derivative of the dual value with respect to the reference masses,
// evaluated at the reference. Only differences mu_n - mu enter, so any
// constant offset in h is irrelevant.
std::vector<double> influence(const std::vector<double>& probs, const std::vector<double>& values,
                              double delta) {
  std::vector<double> h(probs.size(), 0.0);
  const DualSolution sol = solve_dual({probs, values, delta});
  if (sol.nonrobust) return values;
  if (!(sol.alpha_star > 0.0)) return h;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) h[i] = -sol.alpha_star * sol.worst_case[i] / probs[i];
  }
  return h;
}

double cell_min_probability(const TabularRMDP& model, std::size_t c) {
  double p = 1.0;
  for (double x : model.rewards[c].probs) {
    if (x > 0.0) p = std::min(p, x);
  }
  for (double x : model.transitions[c].probs) {
    if (x > 0.0) p = std::min(p, x);
  }
  return p;
}

QFunction uniform_q(const TabularRMDP& model, const StreamId& id, double lo, double hi) {
  Substream stream(id);
  QFunction q = QFunction::zeros_like(model);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = lo + (hi - lo) * stream.uniform();
  return q;
}

double sup_of(const std::vector<double>& xs, bool absolute) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, absolute ? std::abs(x) : x);
  return m;
}

}  // namespace

double BiasVarianceRow::sup_bias() const { return sup_of(bias, true); }

double BiasVarianceRow::sup_variance() const { return sup_of(variance, false); }

bool BiasVarianceRow::within_ceilings() const {
  for (std::size_t c = 0; c < bias.size(); ++c) {
    if (std::abs(bias[c]) > bias_ceiling[c] || variance[c] > variance_ceiling[c]) return false;
  }
  return true;
}

BiasVarianceTable estimate_bias_variance(const TabularRMDP& model, const QFunction& q,
                                         const std::vector<std::size_t>& n_list,
                                         std::size_t reps, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("estimate_bias_variance: reps must be >= 2");
  require_valid(model);
  const std::size_t cells = model.n_cells();
  const QFunction exact = exact_bellman(model, q);
  const std::vector<double> v = value_of_q(q);

  std::vector<std::vector<double>> h_reward(cells);
  std::vector<std::vector<double>> h_transition(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& r = model.rewards[c];
    h_reward[c] = influence(r.probs, r.atoms, model.delta);
    const auto& t = model.transitions[c];
    std::vector<double> u(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = v[t.atoms[i]];
    h_transition[c] = influence(t.probs, u, model.delta);
  }

  const double sp = span_seminorm(q);
  const double width =
      static_cast<double>(std::max(model.n_states, model.n_reward_values()));
  const double log_factor = 1.0 + std::log(width);
  const double r_max = model.r_max();

  BiasVarianceTable table;
  table.n_states = model.n_states;
  table.n_actions = model.n_actions;
  table.reps = reps;
  table.small_adversary = validate(model).small_adversary;

  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::size_t n = n_list[idx];
    // Per replicate: raw deviation and control-variated deviation per cell.
    std::vector<double> raw(reps * cells);
    std::vector<double> adjusted(reps * cells);
    parallel_for(reps, [&](std::size_t r) {
      const EmpiricalModel emp = sample_empirical_model(model, n, seed, static_cast<std::uint32_t>(r),
                                                        static_cast<std::uint32_t>(idx));
      const QFunction t = empirical_bellman(emp, q, model.delta);
      for (std::size_t c = 0; c < cells; ++c) {
        double cv = 0.0;
        const auto& er = emp.rewards[c].probs;
        const auto& rr = model.rewards[c].probs;
        for (std::size_t i = 0; i < er.size(); ++i) cv += (er[i] - rr[i]) * h_reward[c][i];
        const auto& et = emp.transitions[c].probs;
        const auto& rt = model.transitions[c].probs;
        for (std::size_t i = 0; i < et.size(); ++i) {
          cv += model.gamma * (et[i] - rt[i]) * h_transition[c][i];
        }
        const double d = t[c] - exact[c];
        raw[r * cells + c] = d;
        adjusted[r * cells + c] = d - cv;
      }
    });

    BiasVarianceRow row;
    row.n = n;
    const double k = static_cast<double>(reps);
    for (std::size_t c = 0; c < cells; ++c) {
      double mean_raw = 0.0;
      double mean_adj = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        mean_raw += raw[r * cells + c];
        mean_adj += adjusted[r * cells + c];
      }
      mean_raw /= k;
      mean_adj /= k;
      double m2 = 0.0;
      double m4 = 0.0;
      double m2_adj = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double x = raw[r * cells + c] - mean_raw;
        m2 += x * x;
        m4 += x * x * x * x;
        const double y = adjusted[r * cells + c] - mean_adj;
        m2_adj += y * y;
      }
      const double var = m2 / (k - 1.0);
      // Var(s^2) ~ (mu4 - sigma^4 (k - 3) / (k - 1)) / k.
      const double mu4 = m4 / k;
      const double var_of_var = std::max(0.0, (mu4 - var * var * (k - 3.0) / (k - 1.0)) / k);

      row.raw_bias.push_back(mean_raw);
      row.bias.push_back(mean_adj);
      row.variance.push_back(var);
      row.stderr_bias.push_back(std::sqrt(m2_adj / (k - 1.0) / k));
      row.stderr_variance.push_back(std::sqrt(var_of_var));

      const double p = cell_min_probability(model, c);
      const double nn = static_cast<double>(n);
      row.variance_ceiling.push_back(104.0 * (r_max * r_max + model.gamma * model.gamma * sp * sp) /
                                     (p * p * nn) * log_factor);
      row.bias_ceiling.push_back(4480.0 * (r_max + model.gamma * sp) / (p * p * p * nn) *
                                 log_factor);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ContractionSample probe_pair(const EmpiricalOperator& op, const QFunction& q1,
                             const QFunction& q2) {
  ContractionSample out;
  const double dist = sup_distance(q1, q2);
  const QFunction t1 = op(q1);
  const QFunction t2 = op(q2);
  if (dist > 0.0) out.ratio = sup_distance(t1, t2) / dist;

  QFunction lo = q1;
  QFunction hi = q1;
  for (std::size_t i = 0; i < q1.size(); ++i) {
    lo[i] = std::min(q1[i], q2[i]);
    hi[i] = std::max(q1[i], q2[i]);
  }
  const QFunction t_lo = op(lo);
  const QFunction t_hi = op(hi);
  for (std::size_t i = 0; i < t_lo.size(); ++i) {
    if (t_lo[i] > t_hi[i] + kMonotoneSlack) out.monotone = false;
  }
  return out;
}

ContractionReport contraction_probe(const TabularRMDP& model, std::size_t n, std::size_t trials,
                                    std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("contraction_probe: trials must be >= 1");
  require_valid(model);
  const double horizon = 1.0 / (1.0 - model.gamma);
  std::vector<ContractionSample> samples(trials);
  parallel_for(trials, [&](std::size_t i) {
    const auto lane = static_cast<std::uint32_t>(i);
    const EmpiricalOperator op(sample_empirical_model(model, n, seed, lane, 0), model.delta);
    const QFunction q1 = uniform_q(model, {seed, lane, 1, 0}, 0.0, horizon);
    const QFunction q2 = uniform_q(model, {seed, lane, 1, 1}, 0.0, horizon);
    samples[i] = probe_pair(op, q1, q2);
  });

  ContractionReport report;
  report.gamma = model.gamma;
  report.trials = trials;
  for (const auto& s : samples) {
    if (!s.ratio) {
      ++report.skipped;
    } else {
      report.max_ratio = std::max(report.max_ratio, *s.ratio);
    }
    if (!s.monotone) ++report.monotonicity_violations;
  }
  report.passed =
      report.max_ratio <= model.gamma + 1e-9 && report.monotonicity_violations == 0;
  return report;
}

RecenteredReport recentered_probe(const TabularRMDP& model, const QFunction& q_star, double b,
                                  std::size_t n, std::size_t trials, std::uint64_t seed,
                                  double eta) {
  if (!(b >= 0.0)) throw std::invalid_argument("recentered_probe: b must be >= 0");
  if (trials == 0) throw std::invalid_argument("recentered_probe: trials must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("recentered_probe: eta in (0,1)");
  require_valid(model);

  const double nS = static_cast<double>(model.n_states);
  const double nA = static_cast<double>(model.n_actions);
  const double width = static_cast<double>(std::max(model.n_states, model.n_reward_values()));
  const double p = min_support_probability(model);
  const double nn = static_cast<double>(n);
  const double log_h = std::log(4.0 * nS * nS * nA / eta);
  const double log_t = std::log(6.0 * nS * nA * width / eta);
  const double h_scale = 6.0 * model.gamma / (std::pow(p, 1.5) * std::sqrt(nn)) * std::sqrt(log_h);
  const double t_scale = 17.0 / (p * std::sqrt(nn)) * std::sqrt(log_t);
  const double r_max = model.r_max();

  RecenteredReport report;
  report.n = n;
  report.b = b;
  report.eta = eta;
  report.trials = trials;
  report.proviso_met = nn >= 8.0 / (p * p) * log_h;
  report.plain_proviso_met = nn >= 8.0 / (p * p) * std::log(12.0 * nS * nA * width / eta);

  const QFunction t_star = exact_bellman(model, q_star);
  struct Trial {
    double statistic = 0.0;
    double threshold = 0.0;
    double plain = 0.0;
    double plain_threshold = 0.0;
  };
  std::vector<Trial> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    const auto lane = static_cast<std::uint32_t>(i);
    QFunction q = uniform_q(model, {seed, lane, 1, 0}, -b, b);
    q += q_star;
    const EmpiricalOperator op(sample_empirical_model(model, n, seed, lane, 0), model.delta);
    const QFunction t_q = exact_bellman(model, q);
    const QFunction tn_q = op(q);
    const QFunction tn_star = op(q_star);
    double stat = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) {
      stat = std::max(stat, std::abs((t_q[c] - t_star[c]) - (tn_q[c] - tn_star[c])));
    }
    out[i].statistic = stat;
    out[i].threshold = h_scale * sup_distance(q, q_star);
    out[i].plain = sup_distance(tn_q, t_q);
    out[i].plain_threshold = t_scale * (r_max + model.gamma * span_seminorm(q));
  });

  for (const auto& t : out) {
    report.max_statistic = std::max(report.max_statistic, t.statistic);
    if (t.threshold > 0.0) {
      report.max_threshold_ratio = std::max(report.max_threshold_ratio, t.statistic / t.threshold);
    }
    if (t.statistic > t.threshold) ++report.exceedances;
    if (t.plain > t.plain_threshold) ++report.plain_exceedances;
  }
  const double k = static_cast<double>(trials);
  report.exceedance_rate = static_cast<double>(report.exceedances) / k;
  report.plain_exceedance_rate = static_cast<double>(report.plain_exceedances) / k;
  report.binomial_stderr = std::sqrt(eta * (1.0 - eta) / k);
  const double limit = eta + 3.0 * report.binomial_stderr;
  report.passed = report.exceedance_rate <= limit && report.plain_exceedance_rate <= limit;
  return report;
}

}  // namespace robustq
