#include "robustq/instances.hpp"

#include <stdexcept>

namespace robustq {

namespace {

// Kernel row with zero-mass entries dropped.
StateDistribution row(std::initializer_list<std::pair<std::size_t, double>> entries) {
  StateDistribution dist;
  for (const auto& [state, p] : entries) {
    if (p <= 0.0) continue;
    dist.atoms.push_back(state);
    dist.probs.push_back(p);
  }
  return dist;
}

TabularRMDP empty_model(std::size_t n_states, std::size_t n_actions, double gamma,
                        double delta) {
  TabularRMDP model;
  model.n_states = n_states;
  model.n_actions = n_actions;
  model.gamma = gamma;
  model.delta = delta;
  model.rewards.resize(model.n_cells());
  model.transitions.resize(model.n_cells());
  return model;
}

}  // namespace

double hard_mdp_self_loop(double gamma) { return (4.0 * gamma - 1.0) / (3.0 * gamma); }

TabularRMDP build_hard_mdp(double gamma, double delta) {
  if (!(gamma > 0.25 && gamma < 1.0)) {
    throw std::invalid_argument("build_hard_mdp: gamma must lie in (1/4, 1)");
  }
  const double p = hard_mdp_self_loop(gamma);
  TabularRMDP m = empty_model(4, 2, gamma, delta);
  auto set = [&](std::size_t s, std::size_t a, double r, StateDistribution t) {
    m.rewards[m.cell(s, a)] = RewardDistribution::point_mass(r);
    m.transitions[m.cell(s, a)] = std::move(t);
  };
  for (std::size_t a = 0; a < 2; ++a) {
    set(0, a, 0.0, StateDistribution::point_mass(0));
    set(1, a, 1.0, row({{1, p}, {0, 1.0 - p}}));
  }
  set(2, 0, 1.0, row({{2, p}, {0, 1.0 - p}}));
  set(2, 1, 1.0, StateDistribution::point_mass(0));
  set(3, 0, 0.0, StateDistribution::point_mass(1));
  set(3, 1, 0.0, StateDistribution::point_mass(2));
  return m;
}

TabularRMDP build_mixing_mdp(double gamma, double t, double delta) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("build_mixing_mdp: gamma must lie in (0, 1)");
  }
  if (!(t >= 1.0)) throw std::invalid_argument("build_mixing_mdp: t must be >= 1");
  const double p = 1.0 / t;
  TabularRMDP m = empty_model(2, 2, gamma, delta);
  for (std::size_t a = 0; a < 2; ++a) {
    m.rewards[m.cell(0, a)] = RewardDistribution::point_mass(1.0);
    m.rewards[m.cell(1, a)] = RewardDistribution::point_mass(0.0);
    m.transitions[m.cell(0, a)] = row({{0, 1.0 - p}, {1, p}});
    m.transitions[m.cell(1, a)] = row({{0, p}, {1, 1.0 - p}});
  }
  return m;
}

}  // namespace robustq
