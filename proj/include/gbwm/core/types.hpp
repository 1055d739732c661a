#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gbwm {

// One way of (partially) taking goals at a time step: total cash cost and the
// utility collected. Cost and wealth are in thousands, utility is unitless.
struct GoalOption {
  double cost = 0.0;
  double utility = 0.0;
};

// Everything takeable at one time step. `raw` holds every combination of the
// concurrent goals' levels (including skipping each), so it grows as the
// cartesian product when several goals share the step. `front` is the
// cost/utility-efficient subset of `raw`, sorted by cost, always starting at
// the zero option (take nothing).
struct GoalSet {
  int t = 0;
  std::vector<GoalOption> raw;
  std::vector<GoalOption> front;

  // Largest available cost / utility (the last frontier entry).
  double full_cost() const { return front.empty() ? 0.0 : front.back().cost; }
  double full_utility() const { return front.empty() ? 0.0 : front.back().utility; }
  bool trivial() const { return front.size() < 2; }
};

struct PortfolioSet {
  std::vector<double> mus;
  std::vector<double> sigmas;
  int size() const { return static_cast<int>(mus.size()); }
};

// Mean-reverting (Vasicek) rate process for the inflation extension.
struct VasicekParams {
  double kappa = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
  double initial = 0.0;
};

// Efficient frontier given as anchor points (return, volatility) sorted by
// return, plus the number of portfolios to cut it into.
struct EfficientFrontierSpec {
  std::string name;
  std::vector<double> anchor_mus;
  std::vector<double> anchor_sigmas;
  int count = 15;

  // Piecewise-linear interpolation over the anchors, clamped at the ends.
  double sigma_at(double mu) const;
};

// P portfolios with returns equally spaced from the first anchor (the
// minimum-volatility point) to the last, volatilities interpolated.
PortfolioSet discretize_frontier(const EfficientFrontierSpec& spec);

struct Scenario {
  std::string name;
  int T = 0;        // decision steps are t = 0..T
  double h = 1.0;   // step length in years
  double W0 = 0.0;  // wealth at t = 0, before the t = 0 infusion
  std::vector<double> infusions;  // size T+1; infusions[t] arrives at t
  std::vector<GoalSet> goals;     // sorted by t, only steps that have goals
  PortfolioSet portfolios;
  std::optional<VasicekParams> inflation;
  std::string notes;

  const GoalSet* goal_at(int t) const;
  double infusion_at(int t) const {
    return (t >= 0 && t < static_cast<int>(infusions.size())) ? infusions[t] : 0.0;
  }
  double total_utility() const;  // sum of full_utility over goal steps
};

// Strict-dominance Pareto reduction. The zero option is appended, duplicates
// collapse, and the result is sorted with cost and utility both strictly
// increasing.
std::vector<GoalOption> build_pareto_front(std::vector<GoalOption> options);

// Merge one goal (its nonzero levels) into the combination set at `t`,
// expanding `raw` by the cartesian product and recomputing `front`.
void add_concurrent_goal(Scenario& s, int t, const std::vector<GoalOption>& levels);

// Sort goal sets by time and drop steps where nothing can be taken.
void finalize_scenario(Scenario& s);

// Returns human-readable violations; empty means the scenario is usable.
std::vector<std::string> validate_scenario(const Scenario& s);

}  // namespace gbwm
