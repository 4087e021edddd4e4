#include "robustq/bellman.hpp"

#include <stdexcept>

namespace robustq {

namespace {

std::vector<double> reward_duals(const std::vector<RewardDistribution>& rewards, double delta,
                                 double tol) {
  std::vector<double> out(rewards.size());
  for (std::size_t c = 0; c < rewards.size(); ++c) {
    out[c] = dual_value({rewards[c].probs, rewards[c].atoms, delta}, tol);
  }
  return out;
}

QFunction apply_operator(std::size_t n_states, std::size_t n_actions, double gamma,
                         const std::vector<double>& reward_part,
                         const std::vector<StateDistribution>& transitions, double delta,
                         const QFunction& q, double tol) {
  if (q.n_states() != n_states || q.n_actions() != n_actions) {
    throw std::invalid_argument("Bellman operator: q-function shape does not match model");
  }
  const std::vector<double> v = value_of_q(q);
  QFunction out(n_states, n_actions);
  std::vector<double> u;
  for (std::size_t c = 0; c < transitions.size(); ++c) {
    const auto& t = transitions[c];
    u.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = v[t.atoms[i]];
    out[c] = reward_part[c] + gamma * dual_value({t.probs, u, delta}, tol);
  }
  return out;
}

template <typename Atom>
Distribution<Atom> draw_frequencies(const Distribution<Atom>& reference, std::size_t n,
                                    Substream& stream) {
  Distribution<Atom> out{reference.atoms, std::vector<double>(reference.size(), 0.0)};
  std::vector<std::size_t> counts(reference.size(), 0);
  const std::size_t last = reference.size() - 1;
  for (std::size_t draw = 0; draw < n; ++draw) {
    const double x = stream.uniform();
    double cumulative = 0.0;
    std::size_t pick = last;
    for (std::size_t i = 0; i < last; ++i) {
      cumulative += reference.probs[i];
      if (x < cumulative) {
        pick = i;
        break;
      }
    }
    // Skip trailing zero-mass atoms that floating-point slack might select.
    while (reference.probs[pick] <= 0.0 && pick > 0) --pick;
    ++counts[pick];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.probs[i] = static_cast<double>(counts[i]) * inv_n;
  }
  return out;
}

}  // namespace

EmpiricalModel EmpiricalModel::from_reference(const TabularRMDP& model) {
  EmpiricalModel emp;
  emp.n_states = model.n_states;
  emp.n_actions = model.n_actions;
  emp.gamma = model.gamma;
  emp.rewards = model.rewards;
  emp.transitions = model.transitions;
  emp.n = 0;
  return emp;
}

EmpiricalModel sample_empirical_model(const TabularRMDP& model, std::size_t n,
                                      std::uint64_t seed, std::uint32_t lane,
                                      std::uint32_t step) {
  if (n == 0) throw std::invalid_argument("sample_empirical_model: n must be >= 1");
  EmpiricalModel emp;
  emp.n_states = model.n_states;
  emp.n_actions = model.n_actions;
  emp.gamma = model.gamma;
  emp.n = n;
  emp.lineage = {seed, lane, step, 0};
  emp.rewards.reserve(model.n_cells());
  emp.transitions.reserve(model.n_cells());
  for (std::size_t c = 0; c < model.n_cells(); ++c) {
    Substream reward_stream({seed, lane, step, sampling_slot(c, 0)});
    emp.rewards.push_back(draw_frequencies(model.rewards[c], n, reward_stream));
    Substream transition_stream({seed, lane, step, sampling_slot(c, 1)});
    emp.transitions.push_back(draw_frequencies(model.transitions[c], n, transition_stream));
  }
  return emp;
}

QFunction exact_bellman(const TabularRMDP& model, const QFunction& q, double tol) {
  return apply_operator(model.n_states, model.n_actions, model.gamma,
                        reward_duals(model.rewards, model.delta, tol), model.transitions,
                        model.delta, q, tol);
}

QFunction empirical_bellman(const EmpiricalModel& emp, const QFunction& q, double delta,
                            double tol) {
  return apply_operator(emp.n_states, emp.n_actions, emp.gamma,
                        reward_duals(emp.rewards, delta, tol), emp.transitions, delta, q, tol);
}

QFunction recentered_empirical(const EmpiricalModel& emp, const QFunction& q,
                               const QFunction& q_ref, double delta, double tol) {
  return empirical_bellman(emp, q, delta, tol) - empirical_bellman(emp, q_ref, delta, tol);
}

EmpiricalOperator::EmpiricalOperator(EmpiricalModel emp, double delta, double tol)
    : emp_(std::move(emp)), delta_(delta), tol_(tol),
      reward_part_(reward_duals(emp_.rewards, delta, tol)) {}

QFunction EmpiricalOperator::operator()(const QFunction& q) const {
  return apply_operator(emp_.n_states, emp_.n_actions, emp_.gamma, reward_part_,
                        emp_.transitions, delta_, q, tol_);
}

}  // namespace robustq
