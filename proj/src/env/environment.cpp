#include <algorithm>
#include <cmath>

#include "gbwm/env/environment.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

int map_goal_action(double a_g, double wealth, double cost, double thresh) {
  return (a_g >= thresh && wealth >= cost) ? 1 : 0;
}

int map_goal_action_combo(double a_g, double wealth, std::span<const GoalOption> front,
                          int best, int second, double thresh) {
  const int m = static_cast<int>(front.size());
  if (m == 0) return 0;
  int sel = a_g >= thresh ? best : second;
  sel = std::clamp(sel, 0, m - 1);
  if (front[sel].cost <= wealth) return sel;
  for (int q = m - 1; q >= 0; --q)
    if (front[q].cost <= wealth) return q;
  return 0;
}

int map_portfolio_action(double a_p, int P) {
  if (P < 1) throw InputError("map_portfolio_action: P must be >= 1");
  const int p = static_cast<int>(a_p * P);
  return std::clamp(p, 0, P - 1);
}

double step_wealth(double w_post_goal, int p, double z, const PortfolioSet& ps, double h,
                   double infusion_next) {
  const double mu = ps.mus.at(p), sigma = ps.sigmas.at(p);
  const double growth = std::exp((mu - 0.5 * sigma * sigma) * h + sigma * z * std::sqrt(h));
  return w_post_goal * growth + infusion_next;
}

double vasicek_step(double i_t, const VasicekParams& v, double h, double z) {
  if (v.kappa <= 0.0) throw InputError("vasicek_step: kappa must be > 0");
  const double decay = std::exp(-v.kappa * h);
  const double sd = v.sigma * std::sqrt((1.0 - std::exp(-2.0 * v.kappa * h)) / (2.0 * v.kappa));
  return i_t * decay + v.theta * (1.0 - decay) + sd * z;
}

double extrinsic_reward(int t, int T, double u_attained, double a_g, double wealth_pre,
                        double cost_full_T, double util_full_T, double total_utility,
                        double thresh) {
  if (total_utility <= 0.0) throw InputError("extrinsic_reward: total utility must be > 0");
  if (t < T) return u_attained / total_utility;
  if (u_attained > 0.0) return u_attained / total_utility;
  if (a_g >= thresh && cost_full_T > 0.0 && wealth_pre < cost_full_T)
    return 0.25 * (wealth_pre / cost_full_T) * util_full_T / total_utility;
  return 0.0;
}

std::pair<double, double> intrinsic_rewards(double g_sim, double a_g, double p_sim,
                                            double a_p, double rho) {
  return {-0.5 * rho * std::abs(g_sim - a_g), -0.5 * rho * std::abs(p_sim - a_p)};
}

std::pair<std::vector<double>, std::vector<double>> returns_to_go(const EpisodeTrace& tr) {
  const int n = static_cast<int>(tr.steps.size());
  std::vector<double> rg(n, 0.0), rp(n, 0.0);
  for (int t = n - 1; t >= 0; --t) {
    const StepRecord& s = tr.steps[t];
    const double rig = s.r_i_g.value_or(0.0);
    if (t == n - 1) {
      rg[t] = s.r_e + rig;
      rp[t] = s.r_i_p;
    } else {
      rg[t] = rg[t + 1] + s.r_e + rig;
      rp[t] = rp[t + 1] + tr.steps[t + 1].r_e + s.r_i_p;
    }
  }
  return {std::move(rg), std::move(rp)};
}

namespace {

double clamp01(double x, int& clamped) {
  if (x < 0.0 || x > 1.0 || std::isnan(x)) {
    ++clamped;
    if (std::isnan(x)) return 0.0;
    return std::clamp(x, 0.0, 1.0);
  }
  return x;
}

}  // namespace

EpisodeTrace run_episode(const FeatureContext& ctx, Policy& policy, ShockStream& shocks,
                         double rho, double thresh, std::optional<double> initial_wealth) {
  const Scenario& s = ctx.scenario();
  const int T = s.T, P = s.portfolios.size();
  const double total_util = s.total_utility();

  EpisodeTrace tr;
  tr.steps.reserve(T + 1);

  const bool with_inflation = ctx.inflation_aware();
  InflationState infl;
  if (with_inflation) infl.rate = s.inflation->initial;
  const InflationState* infl_ptr = with_inflation ? &infl : nullptr;

  double w = initial_wealth.value_or(s.W0);
  for (int t = 0; t <= T; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.wealth_pre = w;
    if (with_inflation) rec.inflation_rate = infl.rate;

    const GoalSet* gs = s.goal_at(t);
    const bool has_goal = gs && !gs->trivial();
    StateVector pre = ctx.state_pre(t, w, infl_ptr);
    double w_post = w;
    StateVector post;
    if (has_goal) {
      const double a_g = clamp01(policy.goal_action(pre), tr.clamped_actions);
      rec.g_action = a_g;
      rec.g_sim = pre.g;
      // combination costs are nominal at the decision time
      std::vector<GoalOption> front(gs->front.begin(), gs->front.end());
      if (with_inflation && infl.cum_past != 1.0)
        for (GoalOption& o : front) o.cost *= infl.cum_past;
      rec.goal_decision =
          map_goal_action_combo(a_g, w, front, pre.best, pre.second, thresh);
      rec.utility_attained = front[rec.goal_decision].utility;
      w_post = w - front[rec.goal_decision].cost;
      rec.obs_goal = pre.flat();
      post = ctx.state_post(pre, t, w_post, infl_ptr);
    } else {
      post = pre;
    }

    const double a_p = clamp01(policy.portfolio_action(post), tr.clamped_actions);
    rec.p_action = a_p;
    rec.p_sim = post.p;
    rec.portfolio_decision = map_portfolio_action(a_p, P);
    rec.obs_port = post.flat();

    double cost_full_T = 0.0, util_full_T = 0.0;
    if (t == T && has_goal) {
      cost_full_T = gs->full_cost() * (with_inflation ? infl.cum_past : 1.0);
      util_full_T = gs->full_utility();
    }
    rec.r_e = extrinsic_reward(t, T, rec.utility_attained, rec.g_action.value_or(0.0), w,
                               cost_full_T, util_full_T, total_util, thresh);
    auto [rig, rip] = intrinsic_rewards(rec.g_sim, rec.g_action.value_or(0.0), rec.p_sim,
                                        a_p, rho);
    if (has_goal) rec.r_i_g = rig;
    rec.r_i_p = rip;
    tr.total_utility += rec.utility_attained;
    tr.steps.push_back(std::move(rec));

    if (t < T) {
      const double z = shocks.gbm();
      double infusion_next = s.infusion_at(t + 1);
      if (with_inflation) {
        const double zi = shocks.inflation();
        infl.cum_past *= std::exp(infl.rate * s.h);
        infl.rate = vasicek_step(infl.rate, *s.inflation, s.h, zi);
        infusion_next *= infl.cum_past;
      }
      w = step_wealth(w_post, tr.steps.back().portfolio_decision, z, s.portfolios, s.h,
                      infusion_next);
    }
  }

  auto [rg, rp] = returns_to_go(tr);
  tr.R_g = std::move(rg);
  tr.R_p = std::move(rp);
  return tr;
}

TextTable EpisodeTrace::to_table() const {
  TextTable t;
  t.columns = {"t",   "wealth_pre", "g_action", "p_action", "goal_decision",
               "portfolio",         "utility",  "r_e",      "r_i_g",
               "r_i_p",             "g_sim",    "p_sim",    "inflation_rate",
               "R_g",               "R_p"};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const StepRecord& s = steps[i];
    std::vector<std::optional<double>> row;
    row.emplace_back(static_cast<double>(s.t));
    row.emplace_back(s.wealth_pre);
    row.emplace_back(s.g_action);
    row.emplace_back(s.p_action);
    row.emplace_back(static_cast<double>(s.goal_decision));
    row.emplace_back(static_cast<double>(s.portfolio_decision));
    row.emplace_back(s.utility_attained);
    row.emplace_back(s.r_e);
    row.emplace_back(s.r_i_g);
    row.emplace_back(s.r_i_p);
    row.emplace_back(s.g_sim);
    row.emplace_back(s.p_sim);
    row.emplace_back(s.inflation_rate);
    row.emplace_back(i < R_g.size() ? std::optional<double>(R_g[i]) : std::nullopt);
    row.emplace_back(i < R_p.size() ? std::optional<double>(R_p[i]) : std::nullopt);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace gbwm
