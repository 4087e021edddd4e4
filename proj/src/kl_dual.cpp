#include "robustq/kl_dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robustq {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

// Summary of the reference measure restricted to its positive-mass atoms.
struct Reference {
  double total = 0.0;   // sum of masses (1 up to rounding)
  double u_min = 0.0;   // essinf u
  double u_max = 0.0;   // esssup u
  double rho = 0.0;     // mass on {u == essinf u}, normalized
  double mean = 0.0;    // E_mu[u], normalized
};

Reference summarize(const DualProblem& problem) {
  if (problem.probs.size() != problem.values.size()) {
    throw std::invalid_argument("DualProblem: probs and values differ in length");
  }
  Reference ref;
  bool any = false;
  for (std::size_t i = 0; i < problem.probs.size(); ++i) {
    const double p = problem.probs[i];
    if (p <= 0.0) continue;
    const double u = problem.values[i];
    if (!any) {
      ref.u_min = ref.u_max = u;
      any = true;
    } else {
      ref.u_min = std::min(ref.u_min, u);
      ref.u_max = std::max(ref.u_max, u);
    }
    ref.total += p;
  }
  if (!any) throw std::invalid_argument("DualProblem: reference measure has no mass");
  double rho = 0.0;
  double shifted_mean = 0.0;
  for (std::size_t i = 0; i < problem.probs.size(); ++i) {
    const double p = problem.probs[i];
    if (p <= 0.0) continue;
    if (problem.values[i] == ref.u_min) rho += p;
    shifted_mean += p * (problem.values[i] - ref.u_min);
  }
  ref.rho = rho / ref.total;
  ref.mean = ref.u_min + shifted_mean / ref.total;
  return ref;
}

// log E_mu[exp(-(u - u_min)/alpha)] for alpha > 0. Accumulating expm1 keeps
// the result accurate when alpha is large and the log is close to zero.
double shifted_log_mgf(const DualProblem& problem, const Reference& ref, double alpha) {
  double s = 0.0;
  for (std::size_t i = 0; i < problem.probs.size(); ++i) {
    const double p = problem.probs[i];
    if (p <= 0.0) continue;
    s += p * std::expm1(-(problem.values[i] - ref.u_min) / alpha);
  }
  return std::log1p(s / ref.total);
}

double objective(const DualProblem& problem, const Reference& ref, double alpha) {
  if (alpha <= 0.0) return ref.u_min;
  return ref.u_min - alpha * shifted_log_mgf(problem, ref, alpha) - alpha * problem.delta;
}

struct TiltMoments {
  double kl = 0.0;        // KL(mu_alpha || mu)
  double variance = 0.0;  // Var_{mu_alpha}(u)
};

TiltMoments tilt_moments(const DualProblem& problem, const Reference& ref, double alpha) {
  double z = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < problem.probs.size(); ++i) {
    const double p = problem.probs[i];
    if (p <= 0.0) continue;
    const double x = problem.values[i] - ref.u_min;
    const double w = p * std::exp(-x / alpha);
    z += w;
    m1 += w * x;
  }
  m1 /= z;
  double m2 = 0.0;
  for (std::size_t i = 0; i < problem.probs.size(); ++i) {
    const double p = problem.probs[i];
    if (p <= 0.0) continue;
    const double x = problem.values[i] - ref.u_min;
    m2 += p * std::exp(-x / alpha) * (x - m1) * (x - m1);
  }
  TiltMoments out;
  out.variance = m2 / z;
  out.kl = -m1 / alpha - shifted_log_mgf(problem, ref, alpha);
  return out;
}

struct Maximizer {
  double alpha = 0.0;
  double value = 0.0;
  bool at_boundary_zero = false;
  bool nonrobust = false;
  bool constant = false;
};

// Golden-section search on [0, span/delta] down to width tol, then a
// safeguarded Newton refinement of the stationarity condition
// KL(mu_alpha || mu) = delta.
Maximizer maximize(const DualProblem& problem, const Reference& ref, double tol) {
  Maximizer out;
  if (problem.delta == 0.0) {
    out.alpha = std::numeric_limits<double>::infinity();
    out.value = ref.mean;
    out.nonrobust = true;
    return out;
  }
  if (ref.u_max == ref.u_min) {
    out.value = ref.u_min;
    out.at_boundary_zero = true;
    out.constant = true;
    return out;
  }
  if (ref.rho >= std::exp(-problem.delta)) {
    out.value = ref.u_min;
    out.at_boundary_zero = true;
    return out;
  }

  auto f = [&](double alpha) { return objective(problem, ref, alpha); };
  double a = 0.0;
  double b = (ref.u_max - ref.u_min) / problem.delta;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    if (!(c < d)) break;
  }
  double alpha = fc >= fd ? c : d;

  // Near the optimum f is flat to within rounding, so the comparisons above
  // stop carrying information once b - a ~ sqrt(eps) * alpha. The
  // derivative f'(alpha) = KL(mu_alpha || mu) - delta is still accurate
  // there; it is positive as alpha -> 0 (rho < exp(-delta)) and negative at
  // span/delta, which gives a sign bracket for a safeguarded Newton pass.
  double lo = 0.0;
  double hi = (ref.u_max - ref.u_min) / problem.delta;
  for (int iter = 0; iter < 100 && alpha > 0.0; ++iter) {
    const TiltMoments m = tilt_moments(problem, ref, alpha);
    const double g = m.kl - problem.delta;
    if (g == 0.0) break;
    if (g > 0.0) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    double next = alpha + g * alpha * alpha * alpha / m.variance;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const bool done =
        std::abs(next - alpha) <= 4.0 * std::numeric_limits<double>::epsilon() * alpha;
    alpha = next;
    if (done) break;
  }
  out.alpha = alpha;
  out.value = f(alpha);
  return out;
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_dual: tol must be positive");
}

void check_delta(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("DualProblem: delta must be finite and >= 0");
  }
}

}  // namespace

double dual_objective(const DualProblem& problem, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("dual_objective: alpha must be >= 0");
  return objective(problem, summarize(problem), alpha);
}

double dual_value(const DualProblem& problem, double tol) {
  check_tol(tol);
  check_delta(problem.delta);
  const Reference ref = summarize(problem);
  return maximize(problem, ref, tol).value;
}

std::vector<double> worst_case_measure(const DualProblem& problem, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("worst_case_measure: alpha must be > 0");
  const Reference ref = summarize(problem);
  std::vector<double> w(problem.probs.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (problem.probs[i] <= 0.0) continue;
    w[i] = problem.probs[i] * std::exp(-(problem.values[i] - ref.u_min) / alpha);
    z += w[i];
  }
  for (double& x : w) x /= z;
  return w;
}

double kl_divergence(std::span<const double> p, std::span<const double> mu) {
  if (p.size() != mu.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (mu[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / mu[i]);
  }
  return std::max(kl, 0.0);
}

DualSolution solve_dual(const DualProblem& problem, double tol) {
  check_tol(tol);
  check_delta(problem.delta);
  const Reference ref = summarize(problem);
  const Maximizer best = maximize(problem, ref, tol);

  DualSolution sol;
  sol.value = best.value;
  sol.alpha_star = best.alpha;
  sol.at_boundary_zero = best.at_boundary_zero;
  sol.nonrobust = best.nonrobust;

  std::vector<double> mu(problem.probs.begin(), problem.probs.end());
  for (double& p : mu) p = p > 0.0 ? p / ref.total : 0.0;

  if (best.nonrobust || best.constant) {
    sol.worst_case = mu;
    sol.kl_to_reference = 0.0;
  } else if (best.at_boundary_zero) {
    // Adversary moves all mass onto the essinf atoms, in proportion to mu.
    sol.worst_case.assign(mu.size(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i] > 0.0 && problem.values[i] == ref.u_min) sol.worst_case[i] = mu[i] / ref.rho;
    }
    sol.kl_to_reference = -std::log(ref.rho);
  } else {
    sol.worst_case = worst_case_measure(problem, best.alpha);
    sol.kl_to_reference = kl_divergence(sol.worst_case, mu);
  }
  return sol;
}

PrimalDiagnostics primal_check(const DualProblem& problem, const DualSolution& solution,
                               double tol) {
  PrimalDiagnostics diag;
  double mean = 0.0;
  for (std::size_t i = 0; i < solution.worst_case.size(); ++i) {
    mean += solution.worst_case[i] * problem.values[i];
  }
  diag.mean_gap = mean - solution.value;
  const double limit = 10.0 * tol;
  if (solution.nonrobust) {
    diag.passed = std::abs(diag.mean_gap) <= limit;
    return diag;
  }
  if (solution.alpha_star > 0.0) {
    diag.interior = true;
    diag.kl_gap = std::abs(solution.kl_to_reference - problem.delta);
    diag.passed = std::abs(diag.mean_gap) <= limit && diag.kl_gap <= limit;
  } else {
    const Reference ref = summarize(problem);
    diag.essinf_confirmed = solution.value == ref.u_min;
    diag.passed = diag.essinf_confirmed && std::abs(diag.mean_gap) <= limit;
  }
  return diag;
}

}  // namespace robustq
