#include "robustq/oracle.hpp"

#include <algorithm>
#include <stdexcept>

#include "robustq/bellman.hpp"

namespace robustq {

FixedPointResult solve_fixed_point(const TabularRMDP& model, double tol, std::size_t max_iter,
                                   double dual_tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");
  const double step_tol = tol * (1.0 - model.gamma) / model.gamma;
  FixedPointResult result;
  QFunction q = QFunction::zeros_like(model);
  double step = 0.0;
  while (result.iterations < max_iter) {
    QFunction next = exact_bellman(model, q, dual_tol);
    step = sup_distance(next, q);
    q = std::move(next);
    ++result.iterations;
    if (step <= step_tol) {
      result.converged = true;
      break;
    }
  }
  result.residual = sup_distance(exact_bellman(model, q, dual_tol), q);
  result.error_bound = model.gamma / (1.0 - model.gamma) * step;
  result.q_star = std::move(q);
  return result;
}

FixedPointResult nonrobust_fixed_point(const TabularRMDP& model, double tol,
                                       std::size_t max_iter) {
  return solve_fixed_point(model.with_delta(0.0), tol, max_iter);
}

std::vector<double> evaluate_policy_robust(const TabularRMDP& model, const Policy& policy,
                                           double tol) {
  if (policy.action.size() != model.n_states) {
    throw std::invalid_argument("evaluate_policy_robust: policy size mismatch");
  }
  // Restricting the model to the policy's actions turns the max in v(q) into
  // a plain lookup, so value iteration on the restricted model evaluates pi.
  TabularRMDP restricted;
  restricted.n_states = model.n_states;
  restricted.n_actions = 1;
  restricted.gamma = model.gamma;
  restricted.delta = model.delta;
  for (std::size_t s = 0; s < model.n_states; ++s) {
    if (policy.action[s] >= model.n_actions) {
      throw std::invalid_argument("evaluate_policy_robust: action out of range");
    }
    restricted.rewards.push_back(model.reward(s, policy.action[s]));
    restricted.transitions.push_back(model.transition(s, policy.action[s]));
  }
  const FixedPointResult fp = solve_fixed_point(restricted, tol);
  return {fp.q_star.values().begin(), fp.q_star.values().end()};
}

}  // namespace robustq
