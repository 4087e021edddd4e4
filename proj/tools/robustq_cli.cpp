// robustq command line: solve, run, bench, diagnose.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustq/bench.hpp"
#include "robustq/csv.hpp"
#include "robustq/diagnostics.hpp"
#include "robustq/instances.hpp"
#include "robustq/model_io.hpp"
#include "robustq/oracle.hpp"

namespace {

using namespace robustq;

constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitUsage = 64;

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model_path;
  std::string builtin;
  double gamma = 0.6;
  std::optional<double> delta;
  double t = 2.0;
  std::uint64_t seed = 0;
  std::size_t trajectories = 0;  // 0: command default
  std::string out;
  std::optional<double> eps;
  double eta = 0.1;
  std::optional<std::size_t> k0, n0, kvr, lvr, nvr;
  std::optional<double> m_base;
  std::optional<double> c1, c2, c3;
  std::optional<std::size_t> stride;
  double tol = 1e-9;
  std::vector<double> gammas{0.5, 0.6, 0.7, 0.8};
  std::string algo;
  std::vector<std::size_t> ns{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::size_t reps = 2000;
  std::size_t trials = 1000;
  double b = 0.5;
  std::optional<std::size_t> n;
};

TabularRMDP load(const Options& o, const std::string& fallback = "") {
  const double delta = o.delta.value_or(kExperimentDelta);
  if (!o.model_path.empty()) {
    TabularRMDP model = load_model(o.model_path);
    if (o.delta) model = model.with_delta(*o.delta);
    return model;
  }
  const std::string which = o.builtin.empty() ? fallback : o.builtin;
  if (which == "hard") return build_hard_mdp(o.gamma, delta);
  if (which == "mixing") return build_mixing_mdp(o.gamma, o.t, delta);
  throw ValidationError("select a model with --model PATH or --builtin {hard,mixing}");
}

RecipeConstants constants(const Options& o, RecipeConstants defaults = {}) {
  if (o.c1) defaults.c1 = *o.c1;
  if (o.c2) defaults.c2 = *o.c2;
  if (o.c3) defaults.c3 = *o.c3;
  return defaults;
}

std::size_t trajectories_or(const Options& o, std::size_t fallback) {
  return o.trajectories == 0 ? fallback : o.trajectories;
}

bool nonrobust(Algorithm a) { return a == Algorithm::ql || a == Algorithm::nrvrql; }

QFunction reference_q(const TabularRMDP& model, Algorithm a, double tol) {
  const FixedPointResult fp = solve_fixed_point(nonrobust(a) ? model.with_delta(0.0) : model, tol);
  if (!fp.converged) throw NonConvergence("fixed-point iteration did not converge");
  return fp.q_star;
}

// Explicit flags override the recipe; the recipe needs --eps only when some
// parameter is missing.
LearnerConfig learner_config(const TabularRMDP& model, Algorithm a, const Options& o) {
  LearnerConfig config;
  config.algorithm = a;
  if (!is_variance_reduced(a)) {
    if (!(o.k0 && o.n0)) {
      if (!o.eps) throw ValidationError("give --k0 and --n0, or --eps for the recipe");
      config.drql = default_drql_params(model, *o.eps, o.eta, constants(o));
    }
    if (o.k0) config.drql.k0 = *o.k0;
    if (o.n0) config.drql.n0 = *o.n0;
    config.drql.seed = o.seed;
    return config;
  }
  VRQLParams p;
  if (!(o.kvr && o.lvr && o.nvr && o.m_base)) {
    if (!o.eps) throw ValidationError("give --kvr --lvr --nvr --m-base, or --eps for the recipe");
    p = default_vrql_params(model, *o.eps, o.eta, constants(o));
  }
  if (o.kvr) p.k_vr = *o.kvr;
  if (o.nvr) p.n_vr = *o.nvr;
  if (o.lvr || o.m_base) {
    if (o.lvr) p.l_vr = *o.lvr;
    const double base = o.m_base ? *o.m_base : static_cast<double>(p.m.front()) / 4.0;
    p.m = VRQLParams::geometric_recentering(base, p.l_vr);
  }
  p.seed = o.seed;
  config.vrql = p;
  return config;
}

// Writes to --out when given, stdout otherwise.
template <typename Writer>
void emit(const Options& o, Writer&& write) {
  if (o.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + o.out + " for writing");
  write(file);
}

std::string fmt(double x) { return format_double(x); }

int cmd_solve(const Options& o) {
  const TabularRMDP model = load(o);
  require_valid(model);
  const FixedPointResult fp = solve_fixed_point(model, o.tol);
  std::cout << "iterations " << fp.iterations << "\n"
            << "residual " << fmt(fp.residual) << "\n"
            << "error_bound " << fmt(fp.error_bound) << "\n";
  for (std::size_t s = 0; s < model.n_states; ++s) {
    std::cout << "q[" << s << "]";
    for (std::size_t a = 0; a < model.n_actions; ++a) std::cout << ' ' << fmt(fp.q_star(s, a));
    std::cout << "\n";
  }
  if (!o.out.empty()) emit(o, [&](std::ostream& out) { out << serialize_q(fp.q_star) << "\n"; });
  if (!fp.converged) {
    std::cerr << "solve: no convergence within the iteration limit\n";
    return kExitNonConvergence;
  }
  return 0;
}

int cmd_run(const Options& o, Algorithm a) {
  const TabularRMDP model = load(o);
  require_valid(model);
  const LearnerConfig config = learner_config(model, a, o);
  RunOptions run;
  run.q_star = reference_q(model, a, o.tol);
  run.stride = o.stride.value_or(1);
  const auto results = run_trajectories(model, config, run, trajectories_or(o, 1));
  std::vector<TraceRecord> rows;
  for (const auto& r : results) rows.insert(rows.end(), r.trace.begin(), r.trace.end());
  emit(o, [&](std::ostream& out) { write_trace_csv(out, rows, a); });
  if (!o.out.empty()) {
    double mean = 0.0;
    for (const auto& r : results) mean += *r.trace.back().error / static_cast<double>(results.size());
    std::cout << algorithm_name(a) << " trajectories " << results.size() << " samples "
              << results.front().trace.back().samples << " final_error_mean " << fmt(mean) << "\n";
  }
  return 0;
}

int cmd_bench_hard(const Options& o) {
  const Algorithm a = parse_algorithm(o.algo.empty() ? "drql" : o.algo).value();
  Options local = o;
  if (!is_variance_reduced(a)) {
    if (!local.k0) local.k0 = 4096;
    if (!local.n0) local.n0 = 1000;
  }
  const TabularRMDP model = load(local, "hard");
  require_valid(model);
  const LearnerConfig config = learner_config(model, a, local);
  const QFunction q_star = reference_q(model, a, 1e-11);

  // Checkpoints at doubling iteration counts (DRQL from k = 4) or doubling
  // budgets (VRQL from the first iteration's cost).
  std::vector<std::uint64_t> budgets;
  const std::uint64_t total = total_samples(model, config);
  if (is_variance_reduced(a)) {
    std::uint64_t b = model.n_cells() * (config.vrql.m.front() + config.vrql.n_vr);
    for (; b <= total; b *= 2) budgets.push_back(b);
  } else {
    const std::uint64_t per_iter = model.n_cells() * config.drql.n0;
    for (std::uint64_t k = std::min<std::uint64_t>(4, config.drql.k0); k <= config.drql.k0; k *= 2) {
      budgets.push_back(k * per_iter);
    }
  }
  if (budgets.empty() || budgets.back() != total) budgets.push_back(total);
  const ErrorCurve curve = error_curve(model, config, q_star, budgets, trajectories_or(o, 20), o.seed);
  std::cout << "samples,mean_error,stderr\n";
  for (const auto& p : curve.points) {
    std::cout << fmt(p.samples) << ',' << fmt(p.error) << ',' << fmt(p.stderr_error) << "\n";
  }
  try {
    const SlopeFit fit = fit_loglog_slope(curve, 0.5, true);
    std::cout << "slope " << fmt(fit.slope) << " stderr " << fmt(fit.stderr_slope) << "\n";
  } catch (const std::invalid_argument& e) {
    std::cout << "slope unavailable: " << e.what() << "\n";
  }
  if (!o.out.empty()) emit(o, [&](std::ostream& out) { write_trace_csv(out, curve.rows, a); });
  return 0;
}

int cmd_bench_mixing(const Options& o) {
  const Algorithm a = parse_algorithm(o.algo.empty() ? "nrvrql" : o.algo).value();
  Schedule schedule;
  if (a == Algorithm::nrvrql) {
    schedule = mixing_schedule(a, constants(o, {8.0, 4.0, 10.0}));
  } else if (a == Algorithm::vrql) {
    schedule = recipe_schedule(a, constants(o, {1.0, 0.01, 0.01}));
  } else {
    schedule = recipe_schedule(a, constants(o));
  }
  const double eps = o.eps.value_or(a == Algorithm::nrvrql || a == Algorithm::ql ? 0.02 : 0.01);
  const double delta = o.delta.value_or(kExperimentDelta);
  const double t = o.t;
  const auto rows = horizon_sweep([&](double g) { return build_mixing_mdp(g, t, delta); },
                                  o.gammas, eps, schedule, trajectories_or(o, 100), o.seed);
  emit(o, [&](std::ostream& out) { write_sweep_csv(out, rows); });
  for (const auto& r : rows) {
    if (r.flagged()) {
      std::cerr << "gamma " << fmt(r.gamma) << ": " << r.misses
                << " trajectories ended above eps; row excluded from the fit\n";
    }
  }
  try {
    const SlopeFit fit = fit_loglog_slope(rows, 1.0);
    std::cout << "slope " << fmt(fit.slope) << " stderr " << fmt(fit.stderr_slope) << "\n";
  } catch (const std::invalid_argument& e) {
    std::cout << "slope unavailable: " << e.what() << "\n";
  }
  return 0;
}

int cmd_bench_compare(const Options& o) {
  Options local = o;
  if (!local.lvr) local.lvr = 5;
  if (!local.kvr) local.kvr = 40;
  if (!local.nvr) local.nvr = 2;
  if (!local.m_base) local.m_base = 200.0;
  const TabularRMDP model = load(local, "hard");
  require_valid(model);
  const LearnerConfig vr = learner_config(model, Algorithm::vrql, local);
  LearnerConfig dr;
  dr.algorithm = Algorithm::drql;
  dr.drql = drql_for_budget(model, total_samples(model, vr), local.n0.value_or(50), o.seed);
  const QFunction q_star = reference_q(model, Algorithm::vrql, 1e-11);
  const auto cmp = compare_final(model, vr, dr, q_star, trajectories_or(o, 20));
  std::cout << "budget vrql " << cmp.samples_a << " drql " << cmp.samples_b << " (k0 "
            << dr.drql.k0 << ", n0 " << dr.drql.n0 << ")\n"
            << "mean_error vrql " << fmt(cmp.mean_a) << " drql " << fmt(cmp.mean_b) << "\n"
            << "vrql_wins " << cmp.wins_a << "/" << cmp.errors_a.size() << "\n";
  if (!o.out.empty()) {
    emit(o, [&](std::ostream& out) {
      out << "trajectory,vrql_error,drql_error\n";
      for (std::size_t i = 0; i < cmp.errors_a.size(); ++i) {
        out << i << ',' << fmt(cmp.errors_a[i]) << ',' << fmt(cmp.errors_b[i]) << "\n";
      }
    });
  }
  return 0;
}

int cmd_diagnose_bias_var(const Options& o) {
  const TabularRMDP model = load(o);
  const QFunction q_star = reference_q(model, Algorithm::vrql, 1e-11);
  const BiasVarianceTable table = estimate_bias_variance(model, q_star, o.ns, o.reps, o.seed);
  std::cout << "n,sup_bias,sup_var,within_ceilings\n";
  for (const auto& r : table.rows) {
    std::cout << r.n << ',' << fmt(r.sup_bias()) << ',' << fmt(r.sup_variance()) << ','
              << (r.within_ceilings() ? "yes" : "no") << "\n";
  }
  if (!o.out.empty()) emit(o, [&](std::ostream& out) { write_bias_variance_csv(out, table); });
  return 0;
}

int cmd_diagnose_contraction(const Options& o) {
  const TabularRMDP model = load(o);
  const ContractionReport r = contraction_probe(model, o.n.value_or(20), o.trials, o.seed);
  std::cout << "trials " << r.trials << " skipped " << r.skipped << " max_ratio "
            << fmt(r.max_ratio) << " gamma " << fmt(r.gamma) << " monotonicity_violations "
            << r.monotonicity_violations << " " << (r.passed ? "pass" : "fail") << "\n";
  return 0;
}

int cmd_diagnose_recentered(const Options& o) {
  const TabularRMDP model = load(o);
  const QFunction q_star = reference_q(model, Algorithm::vrql, 1e-11);
  const RecenteredReport r =
      recentered_probe(model, q_star, o.b, o.n.value_or(500), o.trials, o.seed, o.eta);
  std::cout << "n " << r.n << " b " << fmt(r.b) << " trials " << r.trials << "\n"
            << "recentered exceedances " << r.exceedances << " rate " << fmt(r.exceedance_rate)
            << (r.proviso_met ? "" : " (proviso unmet)") << " max_ratio "
            << fmt(r.max_threshold_ratio) << "\n"
            << "plain exceedances " << r.plain_exceedances << " rate "
            << fmt(r.plain_exceedance_rate) << (r.plain_proviso_met ? "" : " (proviso unmet)")
            << "\n"
            << "eta " << fmt(r.eta) << " " << (r.passed ? "pass" : "fail") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular KL distributionally robust Q-learning toolkit"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;

  app.add_option("--model", o.model_path, "Model JSON file")->check(CLI::ExistingFile);
  app.add_option("--builtin", o.builtin, "Built-in instance")
      ->check(CLI::IsMember({"hard", "mixing"}));
  app.add_option("--gamma", o.gamma, "Discount factor for built-ins");
  app.add_option("--delta", o.delta, "KL radius (default 0.1)");
  app.add_option("--t", o.t, "Mixing parameter of the mixing instance");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--trajectories", o.trajectories, "Independent runs");
  app.add_option("--out", o.out, "Output path");
  app.add_option("--eps", o.eps, "Target accuracy for parameter recipes");
  app.add_option("--eta", o.eta, "Failure probability for parameter recipes");
  app.add_option("--k0", o.k0, "DRQL iterations");
  app.add_option("--n0", o.n0, "DRQL batch per (s,a)");
  app.add_option("--kvr", o.kvr, "VRQL inner iterations");
  app.add_option("--lvr", o.lvr, "VRQL epochs");
  app.add_option("--nvr", o.nvr, "VRQL inner batch per (s,a)");
  app.add_option("--m-base", o.m_base, "VRQL recentering sizes m_l = m_base 4^l");
  app.add_option("--c1", o.c1, "Recipe constant c1");
  app.add_option("--c2", o.c2, "Recipe constant c2");
  app.add_option("--c3", o.c3, "Recipe constant c3");
  app.add_option("--stride", o.stride, "Trace row every stride iterations");
  app.add_option("--tol", o.tol, "Oracle tolerance");
  app.add_option("--gammas", o.gammas, "Discounts for the horizon sweep")->delimiter(',');
  app.add_option("--algo", o.algo, "Learner")
      ->check(CLI::IsMember({"drql", "ql", "vrql", "nrvrql"}));
  app.add_option("--ns", o.ns, "Sample sizes for bias-var")->delimiter(',');
  app.add_option("--reps", o.reps, "Replications for bias-var");
  app.add_option("--trials", o.trials, "Trials for probes");
  app.add_option("--b", o.b, "Radius around q* for the recentered probe");
  app.add_option("--n", o.n, "Samples per (s,a) for probes");

  int code = 0;
  auto* solve = app.add_subcommand("solve", "Robust fixed point by value iteration");
  solve->callback([&] { code = cmd_solve(o); });

  auto* run = app.add_subcommand("run", "Run a learner and write its trace");
  run->require_subcommand(1);
  for (const char* name : {"drql", "ql", "vrql", "nrvrql"}) {
    const Algorithm a = *parse_algorithm(name);
    run->add_subcommand(name)->callback([&, a] { code = cmd_run(o, a); });
  }

  auto* bench = app.add_subcommand("bench", "Experiments");
  bench->require_subcommand(1);
  bench->add_subcommand("hard", "Error curve on the hard instance")
      ->callback([&] { code = cmd_bench_hard(o); });
  bench->add_subcommand("mixing", "Horizon sweep on the mixing family")
      ->callback([&] { code = cmd_bench_mixing(o); });
  bench->add_subcommand("compare", "VRQL vs DRQL at equal budget")
      ->callback([&] { code = cmd_bench_compare(o); });

  auto* diagnose = app.add_subcommand("diagnose", "Empirical operator probes");
  diagnose->require_subcommand(1);
  diagnose->add_subcommand("bias-var")->callback([&] { code = cmd_diagnose_bias_var(o); });
  diagnose->add_subcommand("contraction")->callback([&] { code = cmd_diagnose_contraction(o); });
  diagnose->add_subcommand("recentered")->callback([&] { code = cmd_diagnose_recentered(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NonConvergence& e) {
    std::cerr << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
