#pragma once

#include "qro/estimators.hpp"
#include "qro/evaluation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qro {

// One benchmark configuration: a nominal model, the LQG weights, estimator
// parameters, and the grid of uncertainty magnitudes to sweep.
struct Scenario {
  std::string name;            // "anti-harmonic" | "harmonic"
  SystemModel model;
  LqgWeights weights;
  double mu = 0.3;
  double delta1 = 0.1;
  double delta2 = 0.1;
  std::optional<double> eps1;  // absent: line-searched per grid point
  std::vector<double> g_grid;
  double deltaG_sign = -1.0;   // sign of the worst-case potential perturbation
  DeltaGConvention convention = DeltaGConvention::primary;
  std::uint64_t seed = 1;
};

struct TableRow {
  double g = 0.0;
  std::optional<double> kal;       // worst-case stationary error, Kalman filter
  std::optional<double> rsk;       // same for the risk-sensitive observer
  std::optional<double> rob;       // guaranteed bound trace(P2)
  std::optional<double> eps1_used;
  std::string notes;               // diagnostics behind any NA cell
};

// The two benchmark setups with their standard grids.
Scenario builtin_scenario(const std::string& name);

// Flat `key = value` text config; see README for the key list. Errors carry
// the offending line number.
Scenario load_config(const std::string& path);

// Canonical text form; load_config(format_config(s)) round-trips, and the
// bundled config files are stored in exactly this normalization.
std::string format_config(const Scenario& s);

struct Eps1Result {
  double eps1_star = 0.0;
  double trace_bound = 0.0;
};

// Minimizes trace(P2) over eps[0] by golden-section search in log space,
// bracketed by a coarse grid presweep; infeasible points count as +inf.
Eps1Result optimize_eps1(const Scenario& s, double g);

// Robust synthesis at one grid point; eps1 fixed, or absent to line-search.
RobustSynthesis robust_cell(const Scenario& s, double g, std::optional<double> eps1);

// The static bound-saturating realization used for table evaluation.
UncertaintyRealization worst_case_realization(const Scenario& s, double g);

std::vector<TableRow> run_table(const Scenario& s);
std::vector<TableRow> run_table_serial(const Scenario& s);

// CSV with header g,kal,rsk,rob,eps1; absent cells print as NA.
std::string format_csv(const std::vector<TableRow>& rows);
void emit_csv(const std::vector<TableRow>& rows, const std::string& path);

// Two-column t,value plot series of the position estimate.
std::string format_series(const StatePath& series);
void emit_series(const StatePath& series, const std::string& path);

}  // namespace qro
