#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "robustq/kl_dual.hpp"
#include "support.hpp"

using namespace robustq;

namespace {

struct Problem {
  std::vector<double> mu;
  std::vector<double> u;
  double delta = 0.0;
  DualProblem view() const { return {mu, u, delta}; }
};

Problem random_problem(std::mt19937_64& rng, std::size_t max_support, double delta) {
  std::uniform_int_distribution<std::size_t> k(2, max_support);
  std::uniform_real_distribution<double> val(-2.0, 3.0);
  Problem p;
  const std::size_t n = k(rng);
  p.mu = testsupport::random_simplex(rng, n);
  for (std::size_t i = 0; i < n; ++i) p.u.push_back(val(rng));
  p.delta = delta;
  return p;
}

double mean(const std::vector<double>& p, const std::vector<double>& u) {
  return std::inner_product(p.begin(), p.end(), u.begin(), 0.0);
}

// Plain (unshifted) tilt in long double; fine for the alpha range used here.
std::vector<double> tilt(const Problem& p, double alpha) {
  const double lo = *std::min_element(p.u.begin(), p.u.end());
  long double z = 0;
  std::vector<long double> w(p.mu.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = p.mu[i] * std::exp(-static_cast<long double>(p.u[i] - lo) / alpha);
    z += w[i];
  }
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<double>(w[i] / z);
  return out;
}

double kl(const std::vector<double>& p, const std::vector<double>& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += p[i] * std::log(p[i] / mu[i]);
  }
  return s;
}

// Smallest E_p[u] over tilted measures inside the KL ball, on a geometric
// alpha grid, plus the measure restricted to the minimizers of u.
double primal_brute_force(const Problem& p) {
  const double lo = *std::min_element(p.u.begin(), p.u.end());
  double rho = 0.0;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    if (p.u[i] == lo) rho += p.mu[i];
  }
  if (-std::log(rho) <= p.delta) return lo;
  // KL decreases and the mean increases with alpha, so the best feasible
  // tilt is the first one; locate it on a coarse grid, then scan the last
  // coarse cell finely.
  double prev = 1e-3;
  for (double alpha = 1e-3; alpha < 1e3; alpha *= 1.001) {
    if (kl(tilt(p, alpha), p.mu) <= p.delta) {
      for (int i = 0; i <= 100000; ++i) {
        const double a = prev + (alpha - prev) * i / 100000.0;
        const auto q = tilt(p, a);
        if (kl(q, p.mu) <= p.delta) return mean(q, p.u);
      }
    }
    prev = alpha;
  }
  return mean(p.mu, p.u);
}

}  // namespace

TEST_CASE("dual_objective examples") {
  Problem c{{0.3, 0.7}, {2.0, 2.0}, 0.4};
  for (double alpha : {0.1, 1.0, 7.0}) {
    CHECK(dual_objective(c.view(), alpha) == doctest::Approx(2.0 - alpha * 0.4).epsilon(1e-14));
  }
  Problem b{{0.5, 0.5}, {0.0, 1.0}, 0.3};
  CHECK(dual_objective(b.view(), 0.0) == 0.0);
  b.delta = 0.1;
  CHECK(dual_objective(b.view(), 1.0) ==
        doctest::Approx(-std::log((1.0 + std::exp(-1.0)) / 2.0) - 0.1).epsilon(1e-14));
}

TEST_CASE("dual_objective stays finite for tiny alpha") {
  Problem p{{0.5, 0.5}, {0.0, 1000.0}, 0.1};
  const double f = dual_objective(p.view(), 1e-6);
  CHECK(std::isfinite(f));
  CHECK(f == doctest::Approx(1e-6 * std::log(2.0) - 1e-7).epsilon(1e-9));
}

TEST_CASE("solve_dual fast paths") {
  Problem c{{0.2, 0.8}, {3.0, 3.0}, 0.5};
  auto s = solve_dual(c.view());
  CHECK(s.value == 3.0);
  CHECK(s.alpha_star == 0.0);

  Problem big{{0.5, 0.5}, {0.0, 1.0}, 100.0};
  s = solve_dual(big.view());
  CHECK(s.value == 0.0);
  CHECK(s.alpha_star == 0.0);
  CHECK(s.at_boundary_zero);

  Problem zero{{0.25, 0.75}, {1.0, 3.0}, 0.0};
  s = solve_dual(zero.view());
  CHECK(s.nonrobust);
  CHECK_FALSE(s.at_boundary_zero);
  CHECK(std::isinf(s.alpha_star));
  CHECK(s.value == 2.5);

  CHECK_THROWS_AS(solve_dual(c.view(), 0.0), std::invalid_argument);
}

TEST_CASE("solve_dual matches a dense alpha grid on the uniform {0,1} problem") {
  Problem p{{0.5, 0.5}, {0.0, 1.0}, 0.1};
  const double hi = 1.0 / p.delta;
  double best = -std::numeric_limits<double>::infinity();
  const int points = 1'000'000;
  for (int i = 0; i < points; ++i) {
    const double alpha = hi * i / (points - 1);
    best = std::max(best, dual_objective(p.view(), alpha));
  }
  const auto s = solve_dual(p.view());
  CHECK(std::abs(s.value - best) <= 1e-6);
  CHECK(s.value >= best - 1e-12);
}

TEST_CASE("worst_case_measure") {
  Problem c{{0.2, 0.3, 0.5}, {1.5, 1.5, 1.5}, 0.1};
  auto w = worst_case_measure(c.view(), 0.7);
  for (std::size_t i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(c.mu[i]).epsilon(1e-15));

  Problem r{{0.1, 0.6, 0.3}, {-1.0, 4.0, 2.0}, 0.1};
  w = worst_case_measure(r.view(), 1e12);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w[i] - r.mu[i]) <= 1e-9);

  Problem b{{0.5, 0.5}, {0.0, 1.0}, 0.1};
  w = worst_case_measure(b.view(), 1.0);
  CHECK(w[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(w[1] == doctest::Approx(0.2689).epsilon(1e-4));

  CHECK_THROWS(worst_case_measure(b.view(), 0.0));
}

TEST_CASE("kl_divergence") {
  const std::vector<double> mu{0.5, 0.5};
  CHECK(kl_divergence(mu, mu) == 0.0);
  CHECK(kl_divergence(std::vector<double>{1.0, 0.0}, mu) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0})));
}

TEST_CASE("primal_check") {
  Problem b{{0.5, 0.5}, {0.0, 1.0}, 0.1};
  auto s = solve_dual(b.view());
  auto d = primal_check(b.view(), s);
  CHECK(d.interior);
  CHECK(d.passed);
  CHECK(d.kl_gap <= 10 * kDefaultDualTol);
  CHECK(std::abs(d.mean_gap) <= 1e-5);

  Problem c{{0.4, 0.6}, {2.0, 2.0}, 0.3};
  d = primal_check(c.view(), solve_dual(c.view()));
  CHECK(d.essinf_confirmed);
  CHECK(d.passed);

  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const Problem p = random_problem(rng, 5, 0.2);
    const auto sol = solve_dual(p.view());
    const auto diag = primal_check(p.view(), sol);
    CHECK(diag.passed);
    if (sol.alpha_star > 0) CHECK(diag.kl_gap <= 10 * kDefaultDualTol);
  }
}

TEST_CASE("dual value properties on random problems") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const double delta = std::uniform_real_distribution<double>(0.001, 2.0)(rng);
    const Problem p = random_problem(rng, 6, delta);
    const double lo = *std::min_element(p.u.begin(), p.u.end());
    const auto s = solve_dual(p.view());
    CHECK(s.value >= lo - 1e-12);
    CHECK(s.value <= mean(p.mu, p.u) + 1e-12);
    CHECK(s.kl_to_reference <= p.delta + 1e-8);

    // Shift equivariance.
    Problem shifted = p;
    for (double& x : shifted.u) x += 1.75;
    const auto t = solve_dual(shifted.view());
    CHECK(t.value == doctest::Approx(s.value + 1.75).epsilon(1e-9));
    CHECK(std::abs(t.alpha_star - s.alpha_star) <= 1e-6 * std::max(1.0, s.alpha_star));

    // Monotone in delta.
    Problem wider = p;
    wider.delta = 1.5 * p.delta;
    CHECK(solve_dual(wider.view()).value <= s.value + 1e-10);
  }
}

TEST_CASE("small delta approaches the mean") {
  std::mt19937_64 rng(4);
  int tested = 0;
  while (tested < 50) {
    const Problem p = random_problem(rng, 4, 1e-8);
    if (*std::min_element(p.mu.begin(), p.mu.end()) < 0.1) continue;
    ++tested;
    CHECK(std::abs(solve_dual(p.view()).value - mean(p.mu, p.u)) <= 1e-3);
  }
}

TEST_CASE("dual equals primal on random problems") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const double delta = std::uniform_real_distribution<double>(0.02, 0.8)(rng);
    const Problem p = random_problem(rng, 4, delta);
    const double dual = solve_dual(p.view()).value;
    const double primal = primal_brute_force(p);
    CHECK(std::abs(dual - primal) <= 1e-5);
  }
}

TEST_CASE("zero-mass atoms are ignored") {
  Problem with{{0.5, 0.0, 0.5}, {0.0, -5.0, 1.0}, 0.1};
  Problem without{{0.5, 0.5}, {0.0, 1.0}, 0.1};
  CHECK(solve_dual(with.view()).value ==
        doctest::Approx(solve_dual(without.view()).value).epsilon(1e-12));
}
