#pragma once

#include <cstdint>
#include <vector>

#include "robustq/kl_dual.hpp"
#include "robustq/model.hpp"
#include "robustq/rng.hpp"

namespace robustq {

/// Per-cell empirical reward and transition measures. Atoms are those of the
/// reference model; unobserved atoms carry zero mass so the dual solver sees
/// the same atom set the reference does.
struct EmpiricalModel {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  double gamma = 0.0;
  std::vector<RewardDistribution> rewards;
  std::vector<StateDistribution> transitions;
  /// Draws per cell; 0 when the measures are the reference ones.
  std::size_t n = 0;
  /// Stream the draws came from (slot is unused here).
  StreamId lineage;

  /// The reference model viewed as an infinite-sample empirical model.
  static EmpiricalModel from_reference(const TabularRMDP& model);
};

/// Cell slot used for the reward (kind 0) and transition (kind 1) draws.
inline std::uint32_t sampling_slot(std::size_t cell, int kind) {
  return static_cast<std::uint32_t>(2 * cell + static_cast<std::size_t>(kind));
}

/// n i.i.d. reward and next-state draws for every (s, a), each cell on its
/// own substream (seed, lane, step, slot(cell, kind)).
EmpiricalModel sample_empirical_model(const TabularRMDP& model, std::size_t n,
                                      std::uint64_t seed, std::uint32_t lane, std::uint32_t step);

/// Exact robust Bellman operator of the reference model.
QFunction exact_bellman(const TabularRMDP& model, const QFunction& q,
                        double tol = kDefaultDualTol);

/// Empirical robust Bellman operator: the dual form evaluated on the
/// empirical measures.
QFunction empirical_bellman(const EmpiricalModel& emp, const QFunction& q, double delta,
                            double tol = kDefaultDualTol);

/// empirical_bellman(q) - empirical_bellman(q_ref) on the same measures.
QFunction recentered_empirical(const EmpiricalModel& emp, const QFunction& q,
                               const QFunction& q_ref, double delta,
                               double tol = kDefaultDualTol);

/// One sampled operator. The reward part does not depend on q and is
/// solved once at construction, so applying the operator to several
/// q-functions reuses both the draws and the reward duals.
class EmpiricalOperator {
 public:
  EmpiricalOperator(EmpiricalModel emp, double delta, double tol = kDefaultDualTol);

  QFunction operator()(const QFunction& q) const;

  const EmpiricalModel& model() const { return emp_; }
  double delta() const { return delta_; }

 private:
  EmpiricalModel emp_;
  double delta_;
  double tol_;
  std::vector<double> reward_part_;
};

}  // namespace robustq
