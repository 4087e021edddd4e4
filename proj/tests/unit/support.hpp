#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "robustq/model.hpp"

namespace testsupport {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (double& x : p) total += (x = u(rng));
  for (double& x : p) x /= total;
  return p;
}

/// Model with random supports; rewards on a small grid in [0, 1].
inline robustq::TabularRMDP random_model(std::mt19937_64& rng, std::size_t n_states,
                                         std::size_t n_actions, double gamma, double delta) {
  robustq::TabularRMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.delta = delta;
  std::uniform_int_distribution<std::size_t> support(1, 3);
  for (std::size_t c = 0; c < n_states * n_actions; ++c) {
    robustq::RewardDistribution r;
    const std::size_t kr = support(rng);
    for (std::size_t i = 0; i < kr; ++i) r.atoms.push_back(static_cast<double>(i + c % 2) / 4.0);
    r.probs = random_simplex(rng, kr);
    m.rewards.push_back(r);

    robustq::StateDistribution t;
    const std::size_t kt = std::min(support(rng), n_states);
    std::vector<std::size_t> states(n_states);
    for (std::size_t s = 0; s < n_states; ++s) states[s] = s;
    std::shuffle(states.begin(), states.end(), rng);
    t.atoms.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(kt));
    t.probs = random_simplex(rng, kt);
    m.transitions.push_back(t);
  }
  return m;
}

/// All rewards and transitions are point masses.
inline robustq::TabularRMDP point_mass_model(double gamma, double delta) {
  robustq::TabularRMDP m;
  m.n_states = 3;
  m.n_actions = 2;
  m.gamma = gamma;
  m.delta = delta;
  const double rewards[6] = {0.2, 1.0, 0.0, 0.5, 0.7, 0.1};
  const std::size_t next[6] = {1, 2, 0, 2, 0, 1};
  for (std::size_t c = 0; c < 6; ++c) {
    m.rewards.push_back(robustq::RewardDistribution::point_mass(rewards[c]));
    m.transitions.push_back(robustq::StateDistribution::point_mass(next[c]));
  }
  return m;
}

}  // namespace testsupport
