#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gbwm/features/features.hpp"
#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

// Goal-count distribution: P(1)=.22, .15, .12, .10, .06, .05, .04, .03, .02,
// P(10)=.01; the residual 0.20 lands on "a goal every year".
constexpr double kCountMass[10] = {0.22, 0.15, 0.12, 0.10, 0.06,
                                   0.05, 0.04, 0.03, 0.02, 0.01};

int draw_goal_count(Rng& rng, int horizon) {
  const double u = rng.uniform01();
  double cum = 0.0;
  int n = horizon;
  for (int i = 0; i < 10; ++i) {
    cum += kCountMass[i];
    if (u < cum) {
      n = i + 1;
      break;
    }
  }
  return std::min(n, horizon);
}

}  // namespace

Scenario generate_scenario(Rng& rng, const CurriculumConfig& cfg) {
  if (cfg.portfolios.size() < 1)
    throw InputError("curriculum: need at least one portfolio");

  Scenario s;
  s.name = "curriculum";
  s.h = 1.0;
  s.portfolios = cfg.portfolios;
  s.T = 5 + static_cast<int>(rng.below(46));  // uniform on {5..50}
  s.infusions.assign(static_cast<std::size_t>(s.T) + 1, 0.0);

  const int ng = draw_goal_count(rng, s.T);

  // One goal always sits at the horizon; the rest are distinct years drawn
  // from {1..T-1} by a partial shuffle.
  std::vector<int> pool(static_cast<std::size_t>(s.T) - 1);
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<int> times;
  times.reserve(static_cast<std::size_t>(ng));
  for (int i = 0; i < ng - 1; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    times.push_back(pool[static_cast<std::size_t>(i)]);
  }
  times.push_back(s.T);
  std::sort(times.begin(), times.end());

  // Costs grow at 3% a year off a uniform base; utilities mix a cost-linked
  // and an independent uniform term. 1 - uniform01() keeps the draws in
  // (0, 1] so no goal is free.
  std::vector<double> full_costs(static_cast<std::size_t>(s.T) + 1, 0.0);
  for (int t : times) {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = 1.0 - rng.uniform01();
    const double cost = 100.0 * u1 * std::pow(1.03, t);
    const double util = 30.0 * u1 + 25.0 * u2;
    add_concurrent_goal(s, t, {{cost, util}});
    full_costs[static_cast<std::size_t>(t)] = cost;
  }
  finalize_scenario(s);

  // Initial wealth lands between the cost of the plan discounted hard (top
  // portfolio, +2 sigma) and discounted soft (bottom portfolio, -2 sigma).
  const int p_hi = s.portfolios.size() - 1;
  const double d1 = discount_sum(full_costs, p_hi, 2.0, s.portfolios, s.h);
  const double d2 = discount_sum(full_costs, 0, -2.0, s.portfolios, s.h);
  s.W0 = rng.uniform(std::min(d1, d2), std::max(d1, d2));

  if (cfg.inflation) {
    VasicekParams v;
    v.theta = rng.uniform(0.005, 0.10);
    v.kappa = rng.uniform(0.1, 0.8);
    v.sigma = rng.uniform(0.0, 0.06);
    v.initial = v.theta;
    s.inflation = v;
  }
  return s;
}

}  // namespace gbwm
