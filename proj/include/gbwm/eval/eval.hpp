#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbwm/core/types.hpp"
#include "gbwm/dp/dp.hpp"
#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/text_table.hpp"

namespace gbwm {

// ---- decision tables ----

// Grid-aligned policy: a pareto goal index (0 where nothing is taken or no
// goal exists) and a portfolio index per (t, node). DP tables come straight
// from the solver; RL tables are produced by batched ensemble inference.
struct DecisionTables {
  WealthGrid grid;
  std::vector<std::vector<int>> goal_choice;  // [t][node]
  std::vector<std::vector<int>> portfolio;    // [t][node]

  TextTable to_table() const;  // columns: t, wealth, goal_choice, portfolio
};

DecisionTables dp_tables(const DPSolution& sol);

// Queries the ensemble at every grid node. At each time step all nodes are
// stacked into one matrix per agent, so the networks run one batched forward
// pass per step. The goal decision at a node maps through the combination
// rule at that node's wealth; the portfolio is then chosen on the post-goal
// wealth. Rejects scenarios with stochastic inflation (the rate is not a grid
// coordinate) and ensembles whose input width does not match the scenario's
// state width.
DecisionTables rl_heatmap(const PolicyEnsemble& ens, const Scenario& s,
                          const WealthGrid& grid);

// Nearest node to `w` in a grid row by log-wealth distance (the rows are
// geometric). Nonpositive wealth snaps to the zero node.
int nearest_node(std::span<const double> row, double w);

// ---- Monte Carlo evaluation ----

struct McResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> utilities;  // per path, in path order
};

// Simulates n_paths wealth trajectories; at each step both decisions are read
// from the grid node nearest the trajectory's wealth. Path `i` draws its
// shocks from (panel_seed, unit=i), so panels are reusable across policies
// for paired comparisons. Paths advance in lockstep, one time step at a
// time; the utility sum accumulates in path order.
McResult mc_evaluate(const DecisionTables& tables, const Scenario& s, int n_paths,
                     std::uint64_t panel_seed);

// Live-policy variant: the ensemble is queried on the exact per-path states,
// batched across all paths at each time step. Handles inflation-aware
// scenarios (the tables cannot). Identical shock keying, so results are
// directly comparable with the table-based run and with per-path episodes.
McResult mc_evaluate(const PolicyEnsemble& ens, const Scenario& s, int n_paths,
                     std::uint64_t panel_seed);

// ---- efficiency ----

struct EfficiencyResult {
  McResult rl;
  McResult dp;
  // rl.mean / dp.mean on the shared panel; absent when the DP mean is zero
  // (the ratio is undefined for such a case).
  std::optional<double> efficiency;
};

// Evaluates the ensemble's grid tables against the DP policy on one shared
// shock panel and returns the ratio of means.
EfficiencyResult rl_efficiency(const Scenario& s, const PolicyEnsemble& ens,
                               const DPSolution& dp, int n_paths,
                               std::uint64_t panel_seed);

// ---- suite evaluation ----

struct SummaryStats {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

// Linear-interpolation quantiles on the sorted sample (the convention used by
// common numeric packages), population standard deviation.
SummaryStats summarize(std::span<const double> xs);

struct CaseReport {
  std::string name;
  double dp_value = 0.0;  // backward-pass value at (0, W0)
  double dp_mean = 0.0;   // DP tables under the shared panel
  double rl_mean = 0.0;
  std::optional<double> efficiency;
  int paths = 0;
  double dp_backward_ms = 0.0;
  double rl_with_goal_ms = 0.0;     // one full decision at a goal step
  double rl_without_goal_ms = 0.0;  // portfolio-only decision
  double rl_eval_ms = 0.0;          // heatmap build + Monte Carlo
};

struct EvaluationReport {
  std::vector<CaseReport> cases;

  std::vector<double> efficiencies() const;  // defined ones, case order
  SummaryStats efficiency_stats() const;
  TextTable to_table() const;
  std::string summary_json() const;  // aggregates + per-case rows
};

struct EvalSettings {
  int n_paths = 10000;
  int nodes_per_step = 400;
  std::uint64_t seed = 1;
};

// Per-case: DP solve, RL heatmap, paired Monte Carlo, efficiency, timings.
// Case `i` uses the panel keyed (seed, "panel", i), so reports are
// reproducible for a fixed seed and case order. Cases run in parallel under
// the process thread cap; outputs land in per-case slots, keeping the report
// independent of scheduling.
EvaluationReport evaluate_suite(const std::vector<Scenario>& cases,
                                const PolicyEnsemble& ens, const EvalSettings& st);

// ---- runtime benchmark ----

struct BenchmarkRow {
  std::string name;
  double dp_backward_ms = 0.0;
  double rl_with_goal_ms = 0.0;
  double rl_without_goal_ms = 0.0;
  bool has_goal_timing = false;  // false for single-step cases with no goal
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  int nodes_per_step = 0;
  int repeats = 0;

  SummaryStats dp_stats() const;
  SummaryStats with_goal_stats() const;
  SummaryStats without_goal_stats() const;
  TextTable to_table() const;
};

// Warmed-up wall-clock timing per case: (a) one full decision at the first
// goal step (state build, both agents, both mappings), (b) a portfolio-only
// decision at the same step, (c) the DP backward pass. Decisions repeat
// `repeats` times per case and report the mean; the backward pass runs once
// after one untimed warmup solve of the smallest case.
BenchmarkReport benchmark_runtimes(const std::vector<Scenario>& cases,
                                   const PolicyEnsemble& ens, int nodes_per_step,
                                   int repeats = 32);

// ---- studies ----

struct FrontierStudyRow {
  std::string frontier;
  double wealth_scale = 1.0;
  double fundedness = 0.0;  // mean of value(0, s*W0) / total utility
  double mean_efficiency = 0.0;
  int cases_counted = 0;  // cases with a defined efficiency
};

struct FrontierStudySettings {
  int n_paths = 1000;
  int nodes_per_step = 150;
  std::uint64_t seed = 1;
  double band_lo = 0.63;
  double band_hi = 0.64;
};

// Swaps each case's portfolio set for the given frontier, rescales every
// initial wealth by one common factor found by bisection so the suite-mean
// fundedness (optimal utility over total utility) lands inside the band, then
// scores the ensemble's efficiency on the rescaled cases without retraining.
// The first frontier is treated as the baseline row. Throws NumericError when
// no scale inside [2^-10, 2^10] reaches the band.
std::vector<FrontierStudyRow> frontier_robustness_study(
    const PolicyEnsemble& ens, const std::vector<EfficientFrontierSpec>& frontiers,
    const std::vector<Scenario>& cases, const FrontierStudySettings& st);

struct InflationCell {
  double theta = 0.0;
  double kappa = 0.0;
  double sigma = 0.0;
  double mean_utility = 0.0;
  double ratio = 0.0;  // mean_utility / the zero-inflation reference mean
};

struct InflationStudy {
  double base_mean = 0.0;  // reference: rate pinned at zero
  std::vector<InflationCell> cells;  // theta-major, then kappa, then sigma

  TextTable to_table() const;
};

// Live-policy study over a Vasicek parameter grid with the initial rate set
// to the mean rate (i0 = theta). The reference run uses theta = sigma = 0, so
// the rate is identically zero and the (0, kappa, 0) cells reproduce it
// exactly; every cell reuses the per-case shock panels, so ratios are paired.
// Requires an inflation-aware (wider-input) ensemble.
InflationStudy inflation_study(const PolicyEnsemble& ens, std::span<const double> thetas,
                               std::span<const double> kappas, std::span<const double> sigmas,
                               const std::vector<Scenario>& cases, int n_paths,
                               std::uint64_t seed);

// ---- plots ----

// Standalone SVG heatmap of one decision table. `what` selects "portfolio"
// (index shading) or "goal" (attained-utility fraction shading). Annotations:
// the cost to fulfil all remaining goals per step, cumulative infusions, and
// the initial-wealth marker; lines are clamped at the axis limits when they
// leave the plotted wealth range.
std::string heatmap_svg(const DecisionTables& tables, const Scenario& s,
                        const std::string& what, const std::string& title);

}  // namespace gbwm
