#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "robustq/instances.hpp"
#include "robustq/model.hpp"
#include "robustq/model_io.hpp"
#include "robustq/oracle.hpp"
#include "support.hpp"

using namespace robustq;

namespace {

TabularRMDP uniform_two_state(double delta) {
  TabularRMDP m;
  m.n_states = 2;
  m.n_actions = 1;
  m.gamma = 0.9;
  m.delta = delta;
  for (int s = 0; s < 2; ++s) {
    m.rewards.push_back({{0.0, 1.0}, {0.5, 0.5}});
    m.transitions.push_back({{0, 1}, {0.5, 0.5}});
  }
  return m;
}

bool has_failed_check(const ValidationReport& r, const std::string& prefix) {
  for (const auto& c : r.checks) {
    if (!c.passed && c.name.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate: uniform model below the adversary limit") {
  const ValidationReport r = validate(uniform_two_state(0.01));
  CHECK(r.ok());
  CHECK(r.small_adversary);
  CHECK(r.p_min == doctest::Approx(0.5));
  CHECK(r.delta_limit == doctest::Approx(0.010471299867295366).epsilon(1e-12));
  CHECK(r.warnings().empty());
}

TEST_CASE("validate: probabilities that do not sum to one are fatal") {
  TabularRMDP m = uniform_two_state(0.01);
  m.transitions[1].probs = {0.5, 0.6};
  const ValidationReport r = validate(m);
  CHECK_FALSE(r.ok());
  CHECK(has_failed_check(r, "transitions"));
  CHECK_THROWS_AS(require_valid(m), ValidationError);
}

TEST_CASE("validate: large delta only warns") {
  const ValidationReport r = validate(uniform_two_state(1.0));
  CHECK(r.ok());
  CHECK_FALSE(r.small_adversary);
  CHECK(r.warnings().size() == 1);
}

TEST_CASE("validate: structural errors") {
  TabularRMDP m = uniform_two_state(0.1);
  m.transitions[0].atoms = {0, 2};
  CHECK(has_failed_check(validate(m), "transition_states"));
  m = uniform_two_state(0.1);
  m.rewards[0].atoms = {0.0, 1.5};
  CHECK(has_failed_check(validate(m), "reward_range"));
  m = uniform_two_state(0.1);
  m.gamma = 1.0;
  CHECK(has_failed_check(validate(m), "gamma"));
}

TEST_CASE("value_of_q and greedy_policy") {
  const QFunction q(2, 2, {1, 2, 3, 0});
  CHECK(value_of_q(q) == std::vector<double>{2, 3});
  CHECK(value_of_q(QFunction(3, 2)) == std::vector<double>{0, 0, 0});
  CHECK(value_of_q(QFunction(1, 2, {5, 5})) == std::vector<double>{5});

  CHECK(greedy_policy(QFunction(1, 2, {1, 2})).action == std::vector<std::size_t>{1});
  CHECK(greedy_policy(QFunction(1, 2, {5, 5})).action == std::vector<std::size_t>{0});
  CHECK(greedy_policy(QFunction(2, 2, {0, -1, 3, 4})).action == std::vector<std::size_t>{0, 1});
}

TEST_CASE("value equals q at the greedy action") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    QFunction q(4, 3);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::round(u(rng));
    const auto v = value_of_q(q);
    const auto pi = greedy_policy(q);
    for (std::size_t s = 0; s < 4; ++s) CHECK(v[s] == q(s, pi.action[s]));
  }
}

TEST_CASE("min_support_probability") {
  CHECK(min_support_probability(uniform_two_state(0.1)) == 0.5);
  CHECK(min_support_probability(build_mixing_mdp(0.6, 2.0)) == 0.5);
  TabularRMDP m = uniform_two_state(0.1);
  m.rewards[1].probs = {0.9, 0.1};
  CHECK(min_support_probability(m) == doctest::Approx(0.1));
}

TEST_CASE("min_support_probability ignores label permutations") {
  std::mt19937_64 rng(5);
  const TabularRMDP m = testsupport::random_model(rng, 3, 2, 0.8, 0.1);
  TabularRMDP swapped = m;
  // Swap the two actions in every state.
  for (std::size_t s = 0; s < 3; ++s) {
    std::swap(swapped.rewards[m.cell(s, 0)], swapped.rewards[m.cell(s, 1)]);
    std::swap(swapped.transitions[m.cell(s, 0)], swapped.transitions[m.cell(s, 1)]);
  }
  CHECK(min_support_probability(swapped) == min_support_probability(m));
}

TEST_CASE("span_seminorm") {
  CHECK(span_seminorm(QFunction(2, 2, 7.5)) == 0.0);
  CHECK(span_seminorm(QFunction(2, 2, {0, 1, -2, 3})) == 5.0);
  QFunction q(2, 2, {0.3, 1.1, -2.0, 3.0});
  CHECK(span_seminorm(q + 4.25) == doctest::Approx(span_seminorm(q)).epsilon(1e-15));

  for (double gamma : {0.6, 0.9}) {
    const auto res = solve_fixed_point(build_hard_mdp(gamma));
    CHECK(span_seminorm(res.q_star) <= 1.0 / (1.0 - gamma));
  }
}

TEST_CASE("builtins validate") {
  for (double gamma : {0.3, 0.6, 0.95}) {
    CHECK(validate(build_hard_mdp(gamma)).ok());
    CHECK(validate(build_mixing_mdp(gamma, 2.0)).ok());
  }
}

TEST_CASE("model file round trip") {
  const TabularRMDP hard = build_hard_mdp(0.6);
  CHECK(parse_model(serialize_model(hard)) == hard);

  const auto path = std::filesystem::temp_directory_path() / "robustq_roundtrip.json";
  std::mt19937_64 rng(3);
  TabularRMDP random = testsupport::random_model(rng, 3, 2, 0.7, 0.05);
  // Loading rescales masses whose floating-point sum is not exactly one, so
  // the identity holds for models already in that form.
  for (int pass = 0; pass < 3; ++pass) {
    for (auto& r : random.rewards) r = canonicalize(r);
    for (auto& t : random.transitions) t = canonicalize(t);
  }
  save_model(random, path);
  CHECK(load_model(path) == random);
  std::filesystem::remove(path);
}

TEST_CASE("model file errors") {
  const std::string no_gamma = R"({"n_states": 1, "n_actions": 1, "delta": 0.1,
    "rewards": [[{"values": [1.0], "probs": [1.0]}]],
    "transitions": [[{"states": [0], "probs": [1.0]}]]})";
  try {
    parse_model(no_gamma);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }

  std::string gamma_one = no_gamma;
  gamma_one.insert(1, R"("gamma": 1.0, )");
  const TabularRMDP m = parse_model(gamma_one);
  CHECK_THROWS_AS(require_valid(m), ValidationError);

  CHECK_THROWS_AS(parse_model("{\"n_states\": "), ParseError);
}

TEST_CASE("load merges duplicate atoms and renormalizes") {
  const std::string text = R"({"n_states": 1, "n_actions": 1, "gamma": 0.5, "delta": 0.0,
    "rewards": [[{"values": [0.5, 0.5, 1.0], "probs": [0.25, 0.25, 0.5000000000001]}]],
    "transitions": [[{"states": [0], "probs": [1.0]}]]})";
  const TabularRMDP m = parse_model(text);
  REQUIRE(m.rewards[0].atoms.size() == 2);
  CHECK(m.rewards[0].probs[0] + m.rewards[0].probs[1] == 1.0);
  CHECK(validate(m).ok());
}
