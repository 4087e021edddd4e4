#include "robustq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace robustq {

template <typename Atom>
Distribution<Atom> canonicalize(const Distribution<Atom>& dist, double tol) {
  Distribution<Atom> out;
  for (std::size_t i = 0; i < dist.atoms.size() && i < dist.probs.size(); ++i) {
    auto it = std::find(out.atoms.begin(), out.atoms.end(), dist.atoms[i]);
    if (it == out.atoms.end()) {
      out.atoms.push_back(dist.atoms[i]);
      out.probs.push_back(dist.probs[i]);
    } else {
      out.probs[static_cast<std::size_t>(it - out.atoms.begin())] += dist.probs[i];
    }
  }
  const double total = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
  if (std::abs(total - 1.0) <= tol && total > 0.0) {
    for (double& p : out.probs) p /= total;
  }
  return out;
}

template RewardDistribution canonicalize(const RewardDistribution&, double);
template StateDistribution canonicalize(const StateDistribution&, double);

double TabularRMDP::r_max() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rewards) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.probs[i] > 0.0) best = std::max(best, r.atoms[i]);
    }
  }
  return best;
}

std::size_t TabularRMDP::n_reward_values() const {
  std::set<double> values;
  for (const auto& r : rewards) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.probs[i] > 0.0) values.insert(r.atoms[i]);
    }
  }
  return values.size();
}

TabularRMDP TabularRMDP::with_delta(double new_delta) const {
  TabularRMDP copy = *this;
  copy.delta = new_delta;
  return copy;
}

QFunction::QFunction(std::size_t n_states, std::size_t n_actions, std::vector<double> values)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
  if (values_.size() != n_states * n_actions) {
    throw std::invalid_argument("QFunction: value count does not match |S|x|A|");
  }
}

QFunction& QFunction::operator+=(const QFunction& other) {
  if (!same_shape(other)) throw std::invalid_argument("QFunction: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

QFunction& QFunction::operator-=(const QFunction& other) {
  if (!same_shape(other)) throw std::invalid_argument("QFunction: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

QFunction& QFunction::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

QFunction& QFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

double sup_norm(const QFunction& q) {
  double m = 0.0;
  for (double v : q.values()) m = std::max(m, std::abs(v));
  return m;
}

double sup_distance(const QFunction& lhs, const QFunction& rhs) {
  if (!lhs.same_shape(rhs)) throw std::invalid_argument("sup_distance: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) m = std::max(m, std::abs(lhs[i] - rhs[i]));
  return m;
}

std::vector<double> value_of_q(const QFunction& q) {
  std::vector<double> v(q.n_states());
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    double best = q(s, 0);
    for (std::size_t a = 1; a < q.n_actions(); ++a) best = std::max(best, q(s, a));
    v[s] = best;
  }
  return v;
}

Policy greedy_policy(const QFunction& q) {
  Policy pi;
  pi.action.resize(q.n_states());
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.n_actions(); ++a) {
      if (q(s, a) > q(s, best)) best = a;
    }
    pi.action[s] = best;
  }
  return pi;
}

namespace {

template <typename Atom>
double smallest_positive(const Distribution<Atom>& dist, double current) {
  for (double p : dist.probs) {
    if (p > 0.0) current = std::min(current, p);
  }
  return current;
}

}  // namespace

double min_support_probability(const TabularRMDP& model) {
  double p = 1.0;
  for (const auto& r : model.rewards) p = smallest_positive(r, p);
  for (const auto& t : model.transitions) p = smallest_positive(t, p);
  return p;
}

double span_seminorm(const QFunction& q) {
  if (q.size() == 0) return 0.0;
  auto [lo, hi] = std::minmax_element(q.values().begin(), q.values().end());
  return *hi - *lo;
}

double adversary_power_limit(double p_min) { return -std::log1p(-p_min / 48.0); }

bool ValidationReport::ok() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const ValidationCheck& c) { return c.fatal && !c.passed; });
}

std::vector<std::string> ValidationReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.fatal && !c.passed) out.push_back(c.name + ": " + c.message);
  }
  return out;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (c.passed) continue;
    os << (c.fatal ? "error" : "warning") << " [" << c.name << "] " << c.message << "\n";
  }
  return os.str();
}

namespace {

constexpr double kNormTol = 1e-12;

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void require(const std::string& name, bool passed, const std::string& message,
               bool fatal = true) {
    report_.checks.push_back({name, passed, fatal, passed ? std::string{} : message});
  }

 private:
  ValidationReport& report_;
};

template <typename Atom>
std::string check_distribution(const Distribution<Atom>& dist) {
  if (dist.atoms.empty()) return "empty support";
  if (dist.atoms.size() != dist.probs.size()) return "atoms and probs differ in length";
  double total = 0.0;
  for (double p : dist.probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) return "probability outside [0,1]";
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", not 1";
    return os.str();
  }
  for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < dist.atoms.size(); ++j) {
      if (dist.atoms[i] == dist.atoms[j]) return "duplicate support atom";
    }
  }
  return {};
}

}  // namespace

ValidationReport validate(const TabularRMDP& model) {
  ValidationReport report;
  Checker check(report);

  check.require("n_states", model.n_states > 0, "must be positive");
  check.require("n_actions", model.n_actions > 0, "must be positive");
  check.require("gamma", model.gamma > 0.0 && model.gamma < 1.0, "must lie in (0,1)");
  check.require("delta", std::isfinite(model.delta) && model.delta >= 0.0, "must be >= 0");

  const std::size_t cells = model.n_cells();
  const bool shapes_ok = model.rewards.size() == cells && model.transitions.size() == cells;
  check.require("table_shape", shapes_ok,
                "rewards/transitions must have n_states*n_actions entries");
  if (!shapes_ok || cells == 0) return report;

  for (std::size_t s = 0; s < model.n_states; ++s) {
    for (std::size_t a = 0; a < model.n_actions; ++a) {
      const std::string where = "[" + std::to_string(s) + "][" + std::to_string(a) + "]";
      const auto& r = model.reward(s, a);
      const auto& t = model.transition(s, a);

      const std::string r_err = check_distribution(r);
      check.require("rewards" + where, r_err.empty(), r_err);
      bool rewards_in_range = true;
      for (double x : r.atoms) rewards_in_range = rewards_in_range && x >= 0.0 && x <= 1.0;
      check.require("reward_range" + where, rewards_in_range, "reward values must lie in [0,1]");

      const std::string t_err = check_distribution(t);
      check.require("transitions" + where, t_err.empty(), t_err);
      bool states_in_range = true;
      for (std::size_t x : t.atoms) states_in_range = states_in_range && x < model.n_states;
      check.require("transition_states" + where, states_in_range,
                    "next-state index out of range");
    }
  }

  report.p_min = min_support_probability(model);
  report.delta_limit = adversary_power_limit(report.p_min);
  report.small_adversary = model.delta < report.delta_limit;
  std::ostringstream os;
  os << "delta=" << model.delta << " is not below -log(1-p_min/48)=" << report.delta_limit
     << " (p_min=" << report.p_min << "); error guarantees do not apply";
  check.require("adversary_power", report.small_adversary, os.str(), /*fatal=*/false);
  return report;
}

void require_valid(const TabularRMDP& model) {
  const ValidationReport report = validate(model);
  if (!report.ok()) throw ValidationError(report.summary());
}

}  // namespace robustq
