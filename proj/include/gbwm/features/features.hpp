#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "gbwm/core/types.hpp"

namespace gbwm {

inline constexpr int kStateBlocks = 7;
inline constexpr int kStateDim = 5 + 3 * kStateBlocks;  // 26 (27 with i_norm)
inline constexpr double kFundedCap = 10.0;  // W_min/W_max when no goal cost remains
inline constexpr int kDefaultZGrid = 11;

// z_i = Phi^-1((i+1/2)/n): midpoints of n equal-probability slices.
std::vector<double> z_midpoints(int n);

// Block sums over offsets [0],[1],[2],[3],[4,5],[6..9],[10..).
std::array<double, kStateBlocks> aggregate(std::span<const double> v);

// exp[-(mu - sigma^2/2) h tau - sigma z sqrt(h tau)]
double discount_factor(double mu, double sigma, double h, double z, int tau);

std::vector<double> discount_vec(std::span<const double> values, int p, double z,
                                 const PortfolioSet& ps, double h);
double discount_sum(std::span<const double> values, int p, double z,
                    const PortfolioSet& ps, double h);

// Projected cumulative inflation multiplier over the next tau years given the
// current rate: exp(i*A - B) with the classic Vasicek A/B pair. Multiplies
// plain discount factors when forecasting nominal costs.
double expected_cum_inflation(const VasicekParams& v, double i_curr, double tau_years);

std::vector<double> discount_vec_infl(std::span<const double> values, int p, double z,
                                      const PortfolioSet& ps, double h, double i_curr,
                                      const VasicekParams& v);

double logistic(double x);

// Remaining horizon seen from time t. Offset 0 is the current step. Costs and
// utilities are the full (most expensive) option per step, 0 where no goal.
// Callers building views from a Scenario zero the offset-0 infusion: wealth at
// t already includes it.
struct HorizonView {
  std::span<const double> costs;
  std::span<const double> utilities;
  std::span<const double> infusions;
};

// Take/skip forward simulation for an all-or-nothing goal at offset 0.
double g_sim(const HorizonView& view, double wealth, const PortfolioSet& ps, double h,
             std::span<const double> zgrid);

// Portfolio forward simulation; works at goal and non-goal steps alike.
double p_sim(const HorizonView& view, double wealth, const PortfolioSet& ps, double h,
             std::span<const double> zgrid);

struct GoalSignals {
  double g = 0.5;
  double p = 0.0;
  int best = 0;    // pareto index taken when the goal action clears the threshold
  int second = 0;  // pareto index taken otherwise
};

namespace detail {
// Table-driven variants used by FeatureContext. `ftab` holds discount factors
// laid out [p][z_i][offset] with the given stride (>= view length); factors
// depend on the offset only, so one table serves every time step. The public
// wrappers below build the table on the fly and call these, keeping both
// paths bit-identical.
double g_sim_tab(const HorizonView& view, double wealth, int P,
                 std::span<const double> zgrid, const double* ftab, int stride);
double p_sim_tab(const HorizonView& view, double wealth, int P,
                 std::span<const double> zgrid, const double* ftab, int stride);
GoalSignals goal_signals_tab(const HorizonView& view, std::span<const GoalOption> front,
                             double wealth, int P, std::span<const double> zgrid,
                             const double* ftab, int stride);
std::vector<double> factor_table(const PortfolioSet& ps, std::span<const double> zgrid,
                                 int len, double h);
}  // namespace detail

// Both signals at a goal step. A two-entry front is the all-or-nothing case
// and uses g_sim/p_sim directly; larger fronts build the P x |front| matrix of
// forced-combination expected utilities.
GoalSignals goal_signals(const HorizonView& view, std::span<const GoalOption> front,
                         double wealth, const PortfolioSet& ps, double h,
                         std::span<const double> zgrid);

struct StateVector {
  double t_norm = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  std::array<double, kStateBlocks> u_agg{};
  std::array<double, kStateBlocks> c_min{};
  std::array<double, kStateBlocks> c_max{};
  double g = 0.0;  // g_sim slot; 0 at steps without a goal
  double p = 0.0;  // p_sim slot
  std::optional<double> i_norm;

  // Arbitration pair from goal_signals; metadata, not network input.
  int best = 0;
  int second = 0;

  int dim() const { return i_norm ? kStateDim + 1 : kStateDim; }
  // Layout: t_norm, w_min, w_max, u_agg, c_min, c_max, g, p [, i_norm].
  void flatten(double* out) const;
  std::vector<double> flat() const;
};

struct InflationState {
  double rate = 0.0;      // current instantaneous inflation rate
  double cum_past = 1.0;  // exp of the integrated rate over [0, t)
};

// Per-scenario caches (discount factor table, per-step suffix aggregates) so
// repeated state evaluations stay cheap. Results are bit-identical to the
// free-standing operations above.
class FeatureContext {
 public:
  explicit FeatureContext(const Scenario& s, int zgrid_n = kDefaultZGrid);

  const Scenario& scenario() const { return *s_; }
  std::span<const double> zgrid() const { return zgrid_; }

  // State at (t, W(t-)). Computes goal signals when a goal exists at t.
  // `infl` must be supplied iff the scenario has inflation enabled.
  StateVector state_pre(int t, double wealth, const InflationState* infl = nullptr) const;

  // Same time step after the goal decision: wealth-dependent fields (w_min,
  // w_max, p_sim) recomputed at the post-goal wealth, the rest carried.
  StateVector state_post(const StateVector& pre, int t, double wealth_post,
                         const InflationState* infl = nullptr) const;

  bool inflation_aware() const { return s_->inflation.has_value(); }

 private:
  struct StepCache {
    double den_wmin = 0.0;  // discount_sum(C[t:], p=0, z=-1)
    double den_wmax = 0.0;  // discount_sum(C[t:], p=P-1, z=+1)
    double u_sum = 0.0;
    std::array<double, kStateBlocks> u_agg{};
    std::array<double, kStateBlocks> c_min{};
    std::array<double, kStateBlocks> c_max{};
  };

  HorizonView view_at(int t) const;
  void fill_common(StateVector& sv, int t, double wealth, const InflationState* infl,
                   std::vector<double>& scaled_costs, std::vector<double>& scaled_inf,
                   HorizonView& view) const;

  const Scenario* s_;
  std::vector<double> zgrid_;
  std::vector<double> full_costs_;   // per time step 0..T
  std::vector<double> full_utils_;   // per time step 0..T
  std::vector<double> infusions_;    // per time step 0..T
  std::vector<StepCache> steps_;     // per time step 0..T (no-inflation caches)
  std::vector<double> ftab_;         // discount factors [p][z_i][offset 0..T]
  bool any_infusions_ = false;
};

}  // namespace gbwm
