#pragma once

#include <span>
#include <vector>

#include "gbwm/core/types.hpp"
#include "gbwm/util/text_table.hpp"

namespace gbwm {

// Wealth discretization floor: one currency unit of one thousandth (amounts
// are in thousands), small enough to be economically dead.
inline constexpr double kGridFloor = 1e-3;

struct WealthGrid {
  std::vector<std::vector<double>> nodes;  // per time step 0..T, ascending
};

// Log-spaced nodes between reachability envelopes propagated with z = +-4
// under the extreme portfolios. Every row gets an explicit zero node (wealth
// is absorbing at zero up to infusions); rows after the first goal fall back
// to the floor since goal spending can drain wealth; exact infusion nodes are
// inserted so the zero-wealth transition has its target on the grid. Row 0 is
// {0, W0}: nothing else is reachable at t = 0.
WealthGrid build_wealth_grid(const Scenario& s, int nodes_per_step);

// Normalized lognormal density weights over grid_next for a transition from
// post-goal wealth w_from under portfolio p (infusion_next added on arrival).
// w_from <= 0 transitions deterministically to the node nearest the infusion.
std::vector<double> transition_probabilities(double w_from, int p,
                                             std::span<const double> grid_next,
                                             const PortfolioSet& ps, double h,
                                             double infusion_next);

struct DPSolution {
  WealthGrid grid;
  std::vector<std::vector<double>> value;        // [t][node]
  std::vector<std::vector<int>> goal_policy;     // pareto index, 0 = forgo
  std::vector<std::vector<int>> portfolio_policy;
};

// Bellman backward pass over the grid. Ties break to the lowest portfolio
// index, then the lowest pareto index. Scenarios with stochastic inflation
// are rejected: the extra state dimension does not fit the (t, W) grid.
DPSolution backward_pass(const Scenario& s, const WealthGrid& grid);

// Exact one-state Bellman evaluation against the stored t+1 value row (or the
// terminal rule at t = T). Used to read the value at off-grid wealths, e.g.
// rescaled initial wealth, without rebuilding the grid.
double bellman_value_at(const DPSolution& sol, const Scenario& s, int t, double w);

// Finite shock set replacing the continuous GBM draw; gauss3() is the
// three-point Gauss-Hermite rule (z = -sqrt(3), 0, sqrt(3); weights 1/6, 2/3,
// 1/6), matching standard normal moments through order 5.
struct DiscreteShocks {
  std::vector<double> z;
  std::vector<double> prob;
  static DiscreteShocks gauss3();
};

// Exact optimal value at (0, W0) under the discrete shock set: memoized
// recursion over the reachable wealth tree, no grid. Exponential in T; meant
// for micro scenarios where enumeration oracles exist.
double discrete_exact_value(const Scenario& s, const DiscreteShocks& shocks);

struct HeatmapExport {
  TextTable cells;  // t, wealth, value, goal_choice, portfolio
  TextTable meta;   // t, goal_cost (absent if none), infusion, cum_infusion
};
HeatmapExport policy_heatmap(const DPSolution& sol, const Scenario& s);

// Rebuild a solution (grid, values, policies) from an exported cells table.
// Round-tripping through TextTable is bit-exact, so the rebuilt solution
// matches the original. Throws VersionError on malformed tables.
DPSolution solution_from_heatmap(const HeatmapExport& hx);

}  // namespace gbwm
