#pragma once

#include "robustq/model.hpp"

namespace robustq {

inline constexpr double kExperimentDelta = 0.1;

/// Self-loop probability (4 gamma - 1) / (3 gamma) of the hard instance.
double hard_mdp_self_loop(double gamma);

/// Four-state, two-action instance built around a self-loop state whose
/// value has effective horizon ~ (1 - gamma)^-1:
///   state 0: absorbing, reward 0 (both actions)
///   state 1: both actions stay w.p. p, else move to 0; reward 1
///   state 2: action 0 as state 1; action 1 moves to 0 surely; reward 1
///   state 3: action a moves to state 1 + a surely; reward 0
/// with p = (4 gamma - 1) / (3 gamma). Requires gamma in (1/4, 1).
TabularRMDP build_hard_mdp(double gamma, double delta = kExperimentDelta);

/// Two-state, two-action mixing family: both actions share the kernel
/// [[1-p, p], [p, 1-p]] with p = 1/t; rewards are point masses 1 in state 0
/// and 0 in state 1. Requires gamma in (0, 1) and t >= 1.
TabularRMDP build_mixing_mdp(double gamma, double t, double delta = kExperimentDelta);

}  // namespace robustq
