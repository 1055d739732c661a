#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbwm/core/types.hpp"
#include "gbwm/features/features.hpp"
#include "gbwm/util/rng.hpp"
#include "gbwm/util/text_table.hpp"

namespace gbwm {

inline constexpr double kGoalThreshold = 0.5;

// Source of per-step randomness for an episode. The draw order is fixed: one
// market shock per transition, then one rate shock when inflation is on.
class ShockStream {
 public:
  virtual ~ShockStream() = default;
  virtual double gbm() = 0;
  virtual double inflation() = 0;
};

// Purpose-keyed streams from a (seed, unit) pair; the workhorse.
class SeededShocks final : public ShockStream {
 public:
  SeededShocks(std::uint64_t seed, std::uint64_t unit) : src_(seed, unit) {}
  double gbm() override { return src_.gbm(); }
  double inflation() override { return src_.inflation(); }

 private:
  ShockSource src_;
};

// All shocks zero: deterministic median-path runs for hand traces.
class ZeroShocks final : public ShockStream {
 public:
  double gbm() override { return 0.0; }
  double inflation() override { return 0.0; }
};

// Dual-headed policy. goal_action is queried only at steps with a goal, on
// the pre-decision state; portfolio_action on the post-decision state.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual double goal_action(const StateVector& s) = 0;
  virtual double portfolio_action(const StateVector& s) = 0;
};

struct StepRecord {
  int t = 0;
  double wealth_pre = 0.0;             // W(t-), includes the step-t infusion
  std::optional<double> g_action;      // absent at steps without a goal
  double p_action = 0.0;
  int goal_decision = 0;               // pareto index, 0 = forgo
  int portfolio_decision = 0;
  double utility_attained = 0.0;
  double r_e = 0.0;
  std::optional<double> r_i_g;
  double r_i_p = 0.0;
  double g_sim = 0.0;                  // signal seen by the goal agent
  double p_sim = 0.0;                  // signal seen by the portfolio agent
  std::optional<double> inflation_rate;

  // Policy inputs captured for training (flattened states).
  std::vector<double> obs_goal;        // empty at steps without a goal
  std::vector<double> obs_port;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;       // length T+1
  double total_utility = 0.0;
  std::vector<double> R_g, R_p;        // returns-to-go per step
  int clamped_actions = 0;             // policy outputs pulled back into [0,1]

  TextTable to_table() const;
};

// 1 iff a_g clears the threshold and the cost is affordable.
int map_goal_action(double a_g, double wealth, double cost, double thresh = kGoalThreshold);

// Combination form: a_g >= thresh selects `best`, else `second`; an
// unaffordable selection falls back to the most expensive affordable entry.
int map_goal_action_combo(double a_g, double wealth, std::span<const GoalOption> front,
                          int best, int second, double thresh = kGoalThreshold);

// p with p/P <= a_p < (p+1)/P; a_p = 1 maps to P-1.
int map_portfolio_action(double a_p, int P);

// W((t+1)-) = w_post_goal * exp[(mu_p - sigma_p^2/2) h + sigma_p z sqrt(h)] + infusion_next.
double step_wealth(double w_post_goal, int p, double z, const PortfolioSet& ps, double h,
                   double infusion_next);

// Exact Vasicek transition over one step of length h.
double vasicek_step(double i_t, const VasicekParams& v, double h, double z);

// Extrinsic reward. For t < T: attained utility over total. At T, attained
// utility if any; otherwise the quarter partial credit when the agent wanted
// the goal but W(T-) fell short of the full cost.
double extrinsic_reward(int t, int T, double u_attained, double a_g, double wealth_pre,
                        double cost_full_T, double util_full_T, double total_utility,
                        double thresh = kGoalThreshold);

// (r_i_g, r_i_p) = (-rho/2 |g_sim - a_g|, -rho/2 |p_sim - a_p|).
std::pair<double, double> intrinsic_rewards(double g_sim, double a_g, double p_sim,
                                            double a_p, double rho);

// Undiscounted returns-to-go. R_g(t) sums r_e + r_i_g from t on; R_p(t) sums
// r_e from t+1 on plus r_i_p from t on.
std::pair<std::vector<double>, std::vector<double>> returns_to_go(const EpisodeTrace& tr);

// Roll one episode; initial wealth defaults to the scenario's W0.
EpisodeTrace run_episode(const FeatureContext& ctx, Policy& policy, ShockStream& shocks,
                         double rho, double thresh = kGoalThreshold,
                         std::optional<double> initial_wealth = std::nullopt);

}  // namespace gbwm
