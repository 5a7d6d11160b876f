#include "qro/campaigns.hpp"
#include "qro/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace qro;

struct CommonArgs {
  std::string config;
  std::string scenario = "anti-harmonic";
  std::optional<double> g;
  std::optional<double> mu;
  std::optional<double> eps1;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool both_conventions = false;
};

Scenario make_scenario(const CommonArgs& a) {
  Scenario s = a.config.empty() ? builtin_scenario(a.scenario) : load_config(a.config);
  if (a.mu) s.mu = *a.mu;
  if (a.eps1) s.eps1 = *a.eps1;
  if (a.seed) s.seed = *a.seed;
  return s;
}

void print_mat(const std::string& name, const Eigen::MatrixXd& m) {
  const Eigen::IOFormat fmt(9, 0, "  ", "\n", "  [", "]");
  std::cout << name << " =\n" << m.format(fmt) << "\n";
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

void cmd_derive(const Scenario& s) {
  const DerivedModel d = derive_matrices(s.model);
  std::cout << "scenario: " << s.name << "\n";
  print_mat("A", d.A);
  print_mat("F", d.F);
  print_mat("D", d.D);
  print_mat("m", d.m);
}

void report_worst_case(const Scenario& s, double g, const LinearObserver& obs) {
  const UncertaintyRealization u = worst_case_realization(s, g);
  const EvalResult r = stationary_error(augment(s.model, u, obs));
  std::cout << "worst-case g = " << g << ": ";
  switch (r.verdict) {
    case Verdict::Stable:
      std::cout << "stationary error = " << *r.error << "\n";
      break;
    case Verdict::Unstable:
      std::cout << "N/A (unstable: " << r.diagnostic << ")\n";
      break;
    case Verdict::Unphysical:
      std::cout << "N/A (unphysical covariance)\n";
      break;
  }
}

void cmd_kalman(const Scenario& s, const std::optional<double>& g) {
  const KalmanResult kr = kalman_stationary(s.model);
  print_mat("V_inf", kr.Vinf);
  print_mat("gain", kr.gain);
  const LinearObserver obs = kalman_observer_realization(s.model, s.weights);
  print_mat("R", obs.R);
  print_mat("L", obs.L);
  if (g) report_worst_case(s, *g, obs);
}

void cmd_risk(const Scenario& s, const std::optional<double>& g) {
  const RiskResult rr = risk_stationary(s.model, s.weights, s.mu);
  std::cout << "mu = " << s.mu << "\n";
  print_mat("V_mu", rr.Vmu);
  print_mat("K_mu", rr.Kmu);
  print_mat("R", rr.observer.R);
  print_mat("k", rr.observer.k);
  print_mat("L", rr.observer.L);
  if (g) report_worst_case(s, *g, rr.observer);
}

void cmd_robust(const Scenario& s, const std::optional<double>& g_opt) {
  const double g = g_opt.value_or(0.0);
  const RobustSynthesis syn = robust_cell(s, g, s.eps1);
  std::cout << "g = " << g << "\n";
  if (s.eps1) {
    std::cout << "eps1 (fixed) = " << *s.eps1 << "\n";
  } else {
    const Eps1Result opt = optimize_eps1(s, g);
    std::cout << "eps1 (optimized) = " << opt.eps1_star << "\n";
  }
  print_mat("P1", syn.P1);
  print_mat("P2", syn.P2);
  print_mat("R", syn.observer.R);
  print_mat("k", syn.observer.k);
  std::cout << "guaranteed bound trace(P2) = " << syn.trace_bound << "\n";
  report_worst_case(s, g, syn.observer);
}

void cmd_table(const Scenario& s, const std::string& out, bool both) {
  const std::vector<TableRow> rows = run_table(s);
  if (out.empty()) {
    std::cout << format_csv(rows);
  } else {
    emit_csv(rows, out);
    std::cout << "wrote " << out << "\n";
  }
  if (both) {
    Scenario alt = s;
    alt.convention = s.convention == DeltaGConvention::primary ? DeltaGConvention::alternate
                                                               : DeltaGConvention::primary;
    const std::vector<TableRow> alt_rows = run_table(alt);
    const std::string tag =
        alt.convention == DeltaGConvention::alternate ? "alternate" : "primary";
    if (out.empty()) {
      std::cout << "# " << tag << " convention\n" << format_csv(alt_rows);
    } else {
      const std::string alt_out = with_suffix(out, tag);
      emit_csv(alt_rows, alt_out);
      std::cout << "wrote " << alt_out << "\n";
    }
  }
}

void cmd_simulate(const Scenario& s, const std::string& out) {
  const LinearObserver obs = kalman_observer_realization(s.model, s.weights);
  const Vec2 x0(1.0, 0.0);
  const double t_end = 20.0, dt = 1e-3;
  const StatePath controlled =
      simulate_filter_trajectory(s.model, obs, true, x0, t_end, dt, s.seed);
  StatePath free_path;
  bool free_finite = true;
  try {
    free_path = simulate_filter_trajectory(s.model, obs, false, x0, t_end, dt, s.seed);
  } catch (const NonFinite&) {
    free_finite = false;
  }
  if (out.empty()) {
    std::cout << format_series(controlled);
    return;
  }
  emit_series(controlled, out);
  std::cout << "wrote " << out << " (controlled)\n";
  if (free_finite) {
    const std::string free_out = with_suffix(out, "uncontrolled");
    emit_series(free_path, free_out);
    std::cout << "wrote " << free_out << " (uncontrolled)\n";
  } else {
    std::cout << "uncontrolled trajectory left the floating-point range; not written\n";
  }
}

int cmd_check(const Scenario& s) {
  int failures = 0;
  auto verdict = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << what << "\n";
    if (!ok) ++failures;
  };

  const double g_max = *std::max_element(s.g_grid.begin(), s.g_grid.end());
  const double eps1 = s.eps1 ? *s.eps1 : optimize_eps1(s, g_max).eps1_star;
  const RobustSynthesis syn = robust_cell(s, g_max, eps1);
  const UncertaintyBounds bounds{g_max, 0.0, 0.0};
  EpsArray eps = default_epsilons(bounds);
  eps[0] = eps1;

  const IneqCampaignResult ineq =
      ineq_campaign(s.model, bounds, eps, syn.observer.k, 10000, 10, s.seed);
  std::printf("ineq campaign: %lld samples, %lld violations, worst margins %.3e / %.3e / %.3e\n",
              static_cast<long long>(ineq.n_samples), static_cast<long long>(ineq.violations),
              ineq.worst1, ineq.worst2, ineq.worst_basic);
  verdict(ineq.violations == 0, "uncertainty inequalities hold over sampled admissible set");

  const LemmaCampaignResult lemma = lemma_campaign(100, derive_seed(s.seed, 777), 0.01, 250.0);
  std::printf("lemma campaign: %d instances, premise %d, conclusion %d, worst margin %.3e\n",
              lemma.n_instances, lemma.premise_ok, lemma.conclusion_ok, lemma.worst_margin);
  verdict(lemma.premise_ok == lemma.n_instances && lemma.conclusion_ok == lemma.premise_ok,
          "upper-bound lemma verified by integration");

  if (s.name == "anti-harmonic") {
    const LinearObserver obs = kalman_observer_realization(s.model, s.weights);
    const Vec2 x0(1.0, 0.0);
    const TrajectoryCampaignResult off =
        trajectory_campaign(s.model, obs, false, 100, derive_seed(s.seed, 778), x0);
    const TrajectoryCampaignResult on =
        trajectory_campaign(s.model, obs, true, 100, derive_seed(s.seed, 779), x0);
    std::printf("trajectories: control off diverged %d/%d, control on bounded %d/%d\n",
                off.diverged, off.n_seeds, on.bounded, on.n_seeds);
    verdict(off.diverged >= 90, "uncontrolled estimate diverges");
    verdict(on.bounded >= 90, "controlled estimate stays bounded");
  }

  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimator cross-comparison for uncertain linear quantum stochastic systems"};
  app.require_subcommand(1);

  CommonArgs a;
  double g_val = 0, mu_val = 0, eps1_val = 0;
  std::uint64_t seed_val = 0;

  auto add_common = [&](CLI::App* sub, bool with_g, bool with_mu, bool with_eps1, bool with_seed,
                        bool with_out, bool with_both) {
    auto* cfg = sub->add_option("--config", a.config, "Path to a key = value config file");
    sub->add_option("--scenario", a.scenario, "Built-in scenario: anti-harmonic | harmonic")
        ->excludes(cfg);
    if (with_g)
      sub->add_option("--g", g_val, "Uncertainty magnitude")->check(CLI::NonNegativeNumber);
    if (with_mu)
      sub->add_option("--mu", mu_val, "Risk-sensitivity parameter")->check(CLI::NonNegativeNumber);
    if (with_eps1) sub->add_option("--eps1", eps1_val, "Fix eps1 instead of line-searching");
    if (with_seed) sub->add_option("--seed", seed_val, "Random seed");
    if (with_out) sub->add_option("--out", a.out, "Output file (stdout when omitted)");
    if (with_both)
      sub->add_flag("--both-conventions", a.both_conventions,
                    "Also run the alternate potential-perturbation normalization");
  };

  CLI::App* derive = app.add_subcommand("derive", "Print the derived drift/diffusion/output data");
  add_common(derive, false, false, false, false, false, false);

  CLI::App* kalman = app.add_subcommand("kalman", "Stationary Kalman filter");
  add_common(kalman, true, false, false, false, false, false);

  CLI::App* risk = app.add_subcommand("risk", "Stationary risk-sensitive observer");
  add_common(risk, true, true, false, false, false, false);

  CLI::App* robust = app.add_subcommand("robust", "Guaranteed-cost robust observer");
  add_common(robust, true, false, true, false, false, false);

  CLI::App* table = app.add_subcommand("table", "Sweep the g grid and emit the comparison CSV");
  add_common(table, false, false, true, false, true, true);

  CLI::App* simulate = app.add_subcommand("simulate", "Sample filter trajectories to CSV");
  add_common(simulate, false, false, false, true, true, false);

  CLI::App* check = app.add_subcommand("check", "Run the randomized property campaigns");
  add_common(check, false, false, false, true, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (kalman->count("--g") || risk->count("--g") || robust->count("--g")) a.g = g_val;
    if (risk->count("--mu")) a.mu = mu_val;
    if (robust->count("--eps1") || table->count("--eps1")) a.eps1 = eps1_val;
    if (simulate->count("--seed") || check->count("--seed")) a.seed = seed_val;

    const Scenario s = make_scenario(a);
    if (derive->parsed()) cmd_derive(s);
    else if (kalman->parsed()) cmd_kalman(s, a.g);
    else if (risk->parsed()) cmd_risk(s, a.g);
    else if (robust->parsed()) cmd_robust(s, a.g);
    else if (table->parsed()) cmd_table(s, a.out, a.both_conventions);
    else if (simulate->parsed()) cmd_simulate(s, a.out);
    else if (check->parsed()) return cmd_check(s);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleP1& e) {
    std::cerr << "infeasible synthesis: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleP2& e) {
    std::cerr << "infeasible synthesis: " << e.what() << "\n";
    return 2;
  } catch (const AllInfeasible& e) {
    std::cerr << "infeasible synthesis: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
