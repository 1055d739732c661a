#include <cmath>
#include <set>
#include <string>

#include "gbwm/core/types.hpp"

namespace gbwm {

static bool finite(double v) { return std::isfinite(v); }

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  auto bad = [&](const std::string& m) { out.push_back(m); };

  if (s.T < 1) bad("horizon: must be at least 1");
  if (!(s.h > 0.0) || !finite(s.h)) bad("step_years: must be positive and finite");
  if (!(s.W0 >= 0.0) || !finite(s.W0)) bad("initial_wealth: must be non-negative and finite");

  if (s.infusions.size() != static_cast<std::size_t>(s.T + 1)) {
    bad("infusions: expected one entry per step 0..T");
  } else {
    if (s.infusions[0] != 0.0) bad("infusions[0]: must be 0 (wealth at t=0 is W0)");
    for (int t = 0; t <= s.T; ++t) {
      const double v = s.infusions[t];
      if (!(v >= 0.0) || !finite(v)) {
        bad("infusions[" + std::to_string(t) + "]: must be non-negative and finite");
        break;
      }
    }
  }

  if (s.portfolios.size() < 1) bad("portfolios: need at least one");
  if (s.portfolios.mus.size() != s.portfolios.sigmas.size())
    bad("portfolios: mus and sigmas must have the same length");
  const int P = static_cast<int>(
      std::min(s.portfolios.mus.size(), s.portfolios.sigmas.size()));
  for (int p = 0; p < P; ++p) {
    if (!finite(s.portfolios.mus[p])) bad("mu[" + std::to_string(p) + "] must be finite");
    if (!finite(s.portfolios.sigmas[p]) || !(s.portfolios.sigmas[p] > 0.0))
      bad("sigma[" + std::to_string(p) + "] must be > 0");
    if (p > 0 && s.portfolios.mus[p] < s.portfolios.mus[p - 1])
      bad("mu[" + std::to_string(p) + "]: returns must be non-decreasing in p");
  }

  bool any_goal = false;
  std::set<int> seen;
  for (const auto& g : s.goals) {
    if (g.t < 0 || g.t > s.T)
      bad("goals[t=" + std::to_string(g.t) + "]: time outside 0..T");
    if (!seen.insert(g.t).second)
      bad("goals[t=" + std::to_string(g.t) +
          "]: duplicate set (concurrent goals must be merged into one set)");
    for (const auto& o : g.raw) {
      if (!finite(o.cost) || !finite(o.utility) || o.cost < 0.0 || o.utility < 0.0) {
        bad("goals[t=" + std::to_string(g.t) +
            "].options: negative or non-finite cost/utility");
        break;
      }
    }
    if (g.front.empty() || g.front.front().cost != 0.0 || g.front.front().utility != 0.0)
      bad("goals[t=" + std::to_string(g.t) + "]: pareto front must start at (0,0)");
    for (std::size_t k = 1; k < g.front.size(); ++k) {
      if (!(g.front[k].cost > g.front[k - 1].cost) ||
          !(g.front[k].utility > g.front[k - 1].utility)) {
        bad("goals[t=" + std::to_string(g.t) +
            "]: pareto front must strictly increase in cost and utility");
        break;
      }
    }
    if (!g.trivial()) any_goal = true;
  }
  if (!any_goal) bad("no goals");

  if (s.inflation) {
    const auto& v = *s.inflation;
    if (!(v.kappa > 0.0) || !finite(v.kappa)) bad("inflation.kappa: must be > 0");
    if (!(v.theta >= 0.0) || !finite(v.theta)) bad("inflation.theta: must be non-negative");
    if (!(v.sigma >= 0.0) || !finite(v.sigma)) bad("inflation.sigma: must be non-negative");
    if (!finite(v.initial)) bad("inflation.i0: must be finite");
  }

  return out;
}

}  // namespace gbwm
