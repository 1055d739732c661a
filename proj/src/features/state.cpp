#include <algorithm>
#include <cmath>

#include "gbwm/features/features.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

void StateVector::flatten(double* out) const {
  int k = 0;
  out[k++] = t_norm;
  out[k++] = w_min;
  out[k++] = w_max;
  for (double v : u_agg) out[k++] = v;
  for (double v : c_min) out[k++] = v;
  for (double v : c_max) out[k++] = v;
  out[k++] = g;
  out[k++] = p;
  if (i_norm) out[k++] = *i_norm;
}

std::vector<double> StateVector::flat() const {
  std::vector<double> out(dim());
  flatten(out.data());
  return out;
}

namespace {

// Combination front in the same (nominal) units as the scaled cost buffers:
// costs paid now carry the realized price level, no expected drift yet.
std::span<const GoalOption> front_at(const GoalSet* gs, const InflationState* infl,
                                     std::vector<GoalOption>& storage) {
  if (!infl || infl->cum_past == 1.0) return gs->front;
  storage = gs->front;
  for (GoalOption& o : storage) o.cost *= infl->cum_past;
  return storage;
}

// Normalized block aggregate of a discounted cost vector; zero when the
// vector has no mass.
std::array<double, kStateBlocks> cost_blocks(std::span<const double> disc) {
  auto a = aggregate(disc);
  double sum = 0.0;
  for (double v : a) sum += v;
  if (sum > 0.0)
    for (double& v : a) v /= sum;
  else
    a.fill(0.0);
  return a;
}

}  // namespace

FeatureContext::FeatureContext(const Scenario& s, int zgrid_n) : s_(&s) {
  if (s.portfolios.size() < 1) throw InputError("feature context: scenario has no portfolios");
  zgrid_ = z_midpoints(zgrid_n);
  const int T = s.T;
  const int P = s.portfolios.size();
  full_costs_.assign(T + 1, 0.0);
  full_utils_.assign(T + 1, 0.0);
  for (const GoalSet& gs : s.goals) {
    full_costs_[gs.t] = gs.full_cost();
    full_utils_[gs.t] = gs.full_utility();
  }
  infusions_ = s.infusions;
  infusions_.resize(T + 1, 0.0);
  for (double v : infusions_)
    if (v != 0.0) any_infusions_ = true;

  ftab_ = detail::factor_table(s.portfolios, zgrid_, T + 1, s.h);

  steps_.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    StepCache& c = steps_[t];
    std::span<const double> costs(full_costs_.data() + t, full_costs_.size() - t);
    std::span<const double> utils(full_utils_.data() + t, full_utils_.size() - t);
    c.den_wmin = discount_sum(costs, 0, -1.0, s.portfolios, s.h);
    c.den_wmax = discount_sum(costs, P - 1, 1.0, s.portfolios, s.h);
    for (double v : utils) c.u_sum += v;
    if (c.u_sum > 0.0) {
      c.u_agg = aggregate(utils);
      for (double& v : c.u_agg) v /= c.u_sum;
    }
    c.c_min = cost_blocks(discount_vec(costs, P - 1, 1.0, s.portfolios, s.h));
    c.c_max = cost_blocks(discount_vec(costs, 0, -1.0, s.portfolios, s.h));
  }
}

HorizonView FeatureContext::view_at(int t) const {
  HorizonView v;
  v.costs = std::span<const double>(full_costs_.data() + t, full_costs_.size() - t);
  v.utilities = std::span<const double>(full_utils_.data() + t, full_utils_.size() - t);
  v.infusions = std::span<const double>(infusions_.data() + t, infusions_.size() - t);
  return v;
}

void FeatureContext::fill_common(StateVector& sv, int t, double wealth,
                                 const InflationState* infl,
                                 std::vector<double>& scaled_costs,
                                 std::vector<double>& scaled_inf, HorizonView& view) const {
  const Scenario& s = *s_;
  if (t < 0 || t > s.T) throw InputError("feature context: time step out of range");
  if (inflation_aware() != (infl != nullptr))
    throw InputError(inflation_aware()
                         ? "feature context: inflation state required for this scenario"
                         : "feature context: inflation state supplied but scenario has none");
  const int P = s.portfolios.size();
  const int L = s.T - t + 1;
  sv.t_norm = static_cast<double>(t) / static_cast<double>(s.T);

  double den_min, den_max;
  if (!infl) {
    const StepCache& c = steps_[t];
    den_min = c.den_wmin;
    den_max = c.den_wmax;
    sv.u_agg = c.u_agg;
    sv.c_min = c.c_min;
    sv.c_max = c.c_max;
    view = view_at(t);
    if (any_infusions_) {
      scaled_inf.assign(infusions_.begin() + t, infusions_.end());
      scaled_inf[0] = 0.0;  // wealth at t already contains the step-t infusion
      view.infusions = scaled_inf;
    }
  } else {
    const VasicekParams& v = *s.inflation;
    scaled_costs.resize(L);
    scaled_inf.resize(L);
    for (int d = 0; d < L; ++d) {
      const double mult =
          infl->cum_past * expected_cum_inflation(v, infl->rate, s.h * d);
      scaled_costs[d] = full_costs_[t + d] * mult;
      scaled_inf[d] = infusions_[t + d] * mult;
    }
    scaled_inf[0] = 0.0;
    view.costs = scaled_costs;
    view.utilities = std::span<const double>(full_utils_.data() + t, L);
    view.infusions = scaled_inf;
    den_min = discount_sum(scaled_costs, 0, -1.0, s.portfolios, s.h);
    den_max = discount_sum(scaled_costs, P - 1, 1.0, s.portfolios, s.h);
    sv.u_agg = steps_[t].u_agg;  // utilities carry no price level
    sv.c_min = cost_blocks(discount_vec(scaled_costs, P - 1, 1.0, s.portfolios, s.h));
    sv.c_max = cost_blocks(discount_vec(scaled_costs, 0, -1.0, s.portfolios, s.h));
    sv.i_norm = v.theta > 0.0 ? infl->rate / v.theta : 0.0;
  }

  sv.w_min = den_min > 0.0 ? wealth / den_min : kFundedCap;
  sv.w_max = den_max > 0.0 ? wealth / den_max : kFundedCap;
}

StateVector FeatureContext::state_pre(int t, double wealth, const InflationState* infl) const {
  StateVector sv;
  std::vector<double> sc, si;
  HorizonView view;
  fill_common(sv, t, wealth, infl, sc, si, view);

  const GoalSet* gs = s_->goal_at(t);
  const int stride = s_->T + 1;
  if (gs && !gs->trivial()) {
    std::vector<GoalOption> scaled_front;
    GoalSignals sig = detail::goal_signals_tab(view, front_at(gs, infl, scaled_front),
                                               wealth, s_->portfolios.size(), zgrid_,
                                               ftab_.data(), stride);
    sv.g = sig.g;
    sv.p = sig.p;
    sv.best = sig.best;
    sv.second = sig.second;
  } else {
    sv.g = 0.0;
    sv.p = detail::p_sim_tab(view, wealth, s_->portfolios.size(), zgrid_, ftab_.data(),
                             stride);
  }
  return sv;
}

StateVector FeatureContext::state_post(const StateVector& pre, int t, double wealth_post,
                                       const InflationState* infl) const {
  StateVector sv = pre;
  StateVector tmp;
  std::vector<double> sc, si;
  HorizonView view;
  fill_common(tmp, t, wealth_post, infl, sc, si, view);
  sv.w_min = tmp.w_min;
  sv.w_max = tmp.w_max;

  const GoalSet* gs = s_->goal_at(t);
  const int stride = s_->T + 1;
  if (gs && !gs->trivial()) {
    std::vector<GoalOption> scaled_front;
    sv.p = detail::goal_signals_tab(view, front_at(gs, infl, scaled_front), wealth_post,
                                    s_->portfolios.size(), zgrid_, ftab_.data(), stride)
               .p;
  } else {
    sv.p = detail::p_sim_tab(view, wealth_post, s_->portfolios.size(), zgrid_,
                             ftab_.data(), stride);
  }
  return sv;
}

}  // namespace gbwm
