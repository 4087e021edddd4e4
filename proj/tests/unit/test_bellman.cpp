#include <cmath>
#include <random>

#include "doctest.h"
#include "robustq/bellman.hpp"
#include "robustq/bench.hpp"
#include "robustq/diagnostics.hpp"
#include "robustq/instances.hpp"
#include "robustq/oracle.hpp"
#include "support.hpp"

using namespace robustq;

namespace {

QFunction classical_bellman(const TabularRMDP& m, const QFunction& q) {
  const auto v = value_of_q(q);
  QFunction out(m.n_states, m.n_actions);
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    double r = 0, t = 0;
    for (std::size_t i = 0; i < m.rewards[c].size(); ++i)
      r += m.rewards[c].probs[i] * m.rewards[c].atoms[i];
    for (std::size_t i = 0; i < m.transitions[c].size(); ++i)
      t += m.transitions[c].probs[i] * v[m.transitions[c].atoms[i]];
    out[c] = r + m.gamma * t;
  }
  return out;
}

QFunction random_q(std::mt19937_64& rng, const TabularRMDP& m, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  QFunction q(m.n_states, m.n_actions);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = u(rng);
  return q;
}

// The empirical frequencies packaged as a reference model.
TabularRMDP as_reference(const EmpiricalModel& emp, double delta) {
  TabularRMDP m;
  m.n_states = emp.n_states;
  m.n_actions = emp.n_actions;
  m.gamma = emp.gamma;
  m.delta = delta;
  for (const auto& r : emp.rewards) {
    RewardDistribution d;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.probs[i] > 0) {
        d.atoms.push_back(r.atoms[i]);
        d.probs.push_back(r.probs[i]);
      }
    }
    m.rewards.push_back(d);
  }
  for (const auto& t : emp.transitions) {
    StateDistribution d;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.probs[i] > 0) {
        d.atoms.push_back(t.atoms[i]);
        d.probs.push_back(t.probs[i]);
      }
    }
    m.transitions.push_back(d);
  }
  return m;
}

}  // namespace

TEST_CASE("exact_bellman at delta 0 is the classical operator") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const TabularRMDP m = testsupport::random_model(rng, 4, 2, 0.8, 0.0);
    const QFunction q = random_q(rng, m, 0.0, 5.0);
    CHECK(sup_distance(exact_bellman(m, q), classical_bellman(m, q)) <= 1e-12);
  }
}

TEST_CASE("exact_bellman of zero with point-mass rewards is the reward") {
  for (double delta : {0.0, 0.1, 2.0}) {
    const TabularRMDP m = testsupport::point_mass_model(0.9, delta);
    const QFunction out = exact_bellman(m, QFunction::zeros_like(m));
    for (std::size_t c = 0; c < m.n_cells(); ++c) CHECK(out[c] == m.rewards[c].atoms[0]);
  }
}

TEST_CASE("exact_bellman on the mixing instance at q = 0") {
  // Rewards are point masses and v = 0, so the entries are the rewards.
  const TabularRMDP m = build_mixing_mdp(0.6, 2.0, 0.1);
  const QFunction out = exact_bellman(m, QFunction::zeros_like(m));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 1.0);
  CHECK(out(1, 0) == 0.0);
  CHECK(out(1, 1) == 0.0);

  // With q = 1 on state 0 only, the transition dual is a uniform {0, 1}
  // problem at delta = 0.1. Reference from a dense alpha grid.
  QFunction q(2, 2, {1, 1, 0, 0});
  const std::vector<double> mu{0.5, 0.5}, u{1.0, 0.0};
  double best = -1;
  for (int i = 0; i < 1'000'000; ++i) {
    best = std::max(best, dual_objective({mu, u, 0.1}, 10.0 * i / 999999.0));
  }
  const QFunction t = exact_bellman(m, q);
  CHECK(std::abs(t(0, 0) - (1.0 + 0.6 * best)) <= 1e-6);
  CHECK(std::abs(t(1, 1) - 0.6 * best) <= 1e-6);
}

TEST_CASE("sample_empirical_model") {
  const TabularRMDP m = build_hard_mdp(0.6);
  const EmpiricalModel one = sample_empirical_model(m, 1, 5, 0, 0);
  for (const auto& t : one.transitions) {
    int charged = 0;
    for (double p : t.probs) charged += p > 0;
    CHECK(charged == 1);
  }
  const EmpiricalModel a = sample_empirical_model(m, 37, 5, 2, 9);
  const EmpiricalModel b = sample_empirical_model(m, 37, 5, 2, 9);
  CHECK(a.transitions == b.transitions);
  CHECK(a.rewards == b.rewards);
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    CHECK(a.transitions[c].atoms == m.transitions[c].atoms);
    for (double p : a.transitions[c].probs) {
      CHECK(std::abs(p * 37 - std::round(p * 37)) <= 1e-9);
    }
  }
  CHECK(a.n == 37);
  CHECK(a.lineage.seed == 5);

  const TabularRMDP mix = build_mixing_mdp(0.6, 2.0);
  const EmpiricalModel big = sample_empirical_model(mix, 100000, 1, 0, 0);
  for (const auto& t : big.transitions) {
    for (double p : t.probs) CHECK(std::abs(p - 0.5) <= 0.01);
  }
}

TEST_CASE("empirical_bellman consistency") {
  std::mt19937_64 rng(1);
  const TabularRMDP m = testsupport::random_model(rng, 2, 2, 0.7, 0.1);
  const QFunction q = random_q(rng, m, 0.0, 3.0);

  const EmpiricalModel ref = EmpiricalModel::from_reference(m);
  CHECK(sup_distance(empirical_bellman(ref, q, m.delta), exact_bellman(m, q)) <= 1e-12);

  const EmpiricalModel emp = sample_empirical_model(m, 4, 1, 0, 0);
  CHECK(sup_distance(empirical_bellman(emp, q, 0.1), exact_bellman(as_reference(emp, 0.1), q)) <=
        1e-12);

  const TabularRMDP pm = testsupport::point_mass_model(0.5, 0.3);
  const QFunction t0 = empirical_bellman(sample_empirical_model(pm, 3, 2, 0, 0),
                                         QFunction::zeros_like(pm), 0.3);
  for (std::size_t c = 0; c < pm.n_cells(); ++c) CHECK(t0[c] == pm.rewards[c].atoms[0]);
}

TEST_CASE("recentered_empirical") {
  std::mt19937_64 rng(12);
  const TabularRMDP m = testsupport::random_model(rng, 3, 2, 0.8, 0.1);
  const EmpiricalModel emp = sample_empirical_model(m, 8, 3, 0, 0);
  for (int i = 0; i < 50; ++i) {
    const QFunction q = random_q(rng, m, 0.0, 5.0);
    const QFunction r = random_q(rng, m, 0.0, 5.0);
    CHECK(sup_norm(recentered_empirical(emp, q, q, 0.1)) == 0.0);
    const QFunction h = recentered_empirical(emp, q, r, 0.1);
    CHECK(sup_norm(h) <= m.gamma * sup_distance(q, r) + 1e-9);
    const QFunction two = empirical_bellman(emp, q, 0.1) - empirical_bellman(emp, r, 0.1);
    CHECK(sup_distance(h, two) == 0.0);
  }
}

TEST_CASE("empirical operator: contraction, monotonicity, shift, a.s. bound") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const TabularRMDP m = testsupport::random_model(rng, 3, 2, 0.85, 0.2);
    const EmpiricalOperator op(sample_empirical_model(m, 6, 17, static_cast<std::uint32_t>(trial), 0),
                               m.delta);
    const QFunction q1 = random_q(rng, m, 0.0, 1.0 / (1.0 - m.gamma));
    QFunction q2 = random_q(rng, m, 0.0, 1.0 / (1.0 - m.gamma));
    const QFunction t1 = op(q1);
    CHECK(sup_distance(t1, op(q2)) <= m.gamma * sup_distance(q1, q2) + 1e-9);

    for (std::size_t i = 0; i < q2.size(); ++i) q2[i] = std::min(q2[i], q1[i]);
    const QFunction t2 = op(q2);
    for (std::size_t i = 0; i < t1.size(); ++i) CHECK(t1[i] >= t2[i] - 1e-9);

    if (trial % 10 == 0) {
      const QFunction shifted = op(q1 + 0.75);
      for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(shifted[i] == doctest::Approx(t1[i] + m.gamma * 0.75).epsilon(1e-9));
      }
      CHECK(sup_distance(t1, exact_bellman(m, q1)) <= 2.0 * (m.r_max() + sup_norm(q1)));
    }
  }
}

TEST_CASE("bias and variance decay on a small-adversary instance") {
  const TabularRMDP m = build_mixing_mdp(0.6, 2.0, 0.01);
  REQUIRE(validate(m).small_adversary);
  const QFunction q_star = solve_fixed_point(m, 1e-12).q_star;
  std::vector<std::size_t> ns;
  for (std::size_t n = 16; n <= 4096; n *= 2) ns.push_back(n);
  const BiasVarianceTable table = estimate_bias_variance(m, q_star, ns, 2000, 3);
  std::vector<std::pair<double, double>> bias, var;
  for (const auto& row : table.rows) {
    bias.emplace_back(static_cast<double>(row.n), row.sup_bias());
    var.emplace_back(static_cast<double>(row.n), row.sup_variance());
    CHECK(row.within_ceilings());
  }
  CHECK(fit_loglog_slope(var, 1.0).slope <= -0.9);
  CHECK(fit_loglog_slope(bias, 1.0).slope <= -0.8);
}
