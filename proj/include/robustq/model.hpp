#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustq {

/// Thrown for structural model errors (bad indices, non-normalized
/// distributions, out-of-range discount).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite distribution over atoms of type Atom. Rewards use real atoms,
/// transitions use state indices. `probs[i]` is the mass on `atoms[i]`.
template <typename Atom>
struct Distribution {
  std::vector<Atom> atoms;
  std::vector<double> probs;

  std::size_t size() const { return atoms.size(); }

  static Distribution point_mass(Atom atom) { return {{atom}, {1.0}}; }

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

using RewardDistribution = Distribution<double>;
using StateDistribution = Distribution<std::size_t>;

/// Merges duplicate atoms (summing their mass) and rescales the masses to
/// sum to one when the total is within `tol` of one. Distributions further
/// from normalized are returned merged but unscaled so `validate` can flag
/// them.
template <typename Atom>
Distribution<Atom> canonicalize(const Distribution<Atom>& dist, double tol = 1e-12);

/// Reference model of a KL-robust tabular MDP. Tables are row-major in
/// (state, action).
struct TabularRMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<RewardDistribution> rewards;
  std::vector<StateDistribution> transitions;
  double gamma = 0.0;
  double delta = 0.0;

  std::size_t n_cells() const { return n_states * n_actions; }
  std::size_t cell(std::size_t s, std::size_t a) const { return s * n_actions + a; }

  const RewardDistribution& reward(std::size_t s, std::size_t a) const {
    return rewards[cell(s, a)];
  }
  const StateDistribution& transition(std::size_t s, std::size_t a) const {
    return transitions[cell(s, a)];
  }

  /// Largest reward atom with positive mass.
  double r_max() const;

  /// Number of distinct reward atoms with positive mass across all cells.
  std::size_t n_reward_values() const;

  /// Same model with a different uncertainty radius.
  TabularRMDP with_delta(double new_delta) const;

  friend bool operator==(const TabularRMDP&, const TabularRMDP&) = default;
};

/// Real-valued table over (state, action).
class QFunction {
 public:
  QFunction() = default;
  QFunction(std::size_t n_states, std::size_t n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, fill) {}
  QFunction(std::size_t n_states, std::size_t n_actions, std::vector<double> values);

  static QFunction zeros_like(const TabularRMDP& model) {
    return QFunction(model.n_states, model.n_actions);
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t s, std::size_t a) { return values_[s * n_actions_ + a]; }
  double operator()(std::size_t s, std::size_t a) const { return values_[s * n_actions_ + a]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const QFunction& other) const {
    return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
  }

  QFunction& operator+=(const QFunction& other);
  QFunction& operator-=(const QFunction& other);
  QFunction& operator+=(double c);
  QFunction& operator*=(double c);

  friend QFunction operator+(QFunction lhs, const QFunction& rhs) { return lhs += rhs; }
  friend QFunction operator-(QFunction lhs, const QFunction& rhs) { return lhs -= rhs; }
  friend QFunction operator+(QFunction lhs, double c) { return lhs += c; }
  friend QFunction operator*(double c, QFunction q) { return q *= c; }

  friend bool operator==(const QFunction&, const QFunction&) = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> values_;
};

double sup_norm(const QFunction& q);
double sup_distance(const QFunction& lhs, const QFunction& rhs);

/// Deterministic policy: one action per state.
struct Policy {
  std::vector<std::size_t> action;
  friend bool operator==(const Policy&, const Policy&) = default;
};

/// v(q)(s) = max_b q(s, b).
std::vector<double> value_of_q(const QFunction& q);

/// Per-state argmax; ties go to the smallest action index.
Policy greedy_policy(const QFunction& q);

/// Smallest strictly positive atom mass across every reward and transition
/// distribution of the model.
double min_support_probability(const TabularRMDP& model);

/// max q - min q over all entries.
double span_seminorm(const QFunction& q);

/// -log(1 - p_min / 48): the largest radius for which the limited
/// adversarial power condition holds.
double adversary_power_limit(double p_min);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  bool fatal = true;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double p_min = 0.0;
  double delta_limit = 0.0;
  bool small_adversary = false;

  /// True when no fatal check failed.
  bool ok() const;
  std::vector<std::string> warnings() const;
  std::string summary() const;
};

ValidationReport validate(const TabularRMDP& model);

/// Throws ValidationError with the report summary if validation fails.
void require_valid(const TabularRMDP& model);

}  // namespace robustq
