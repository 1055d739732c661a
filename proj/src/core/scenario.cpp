#include <algorithm>

#include "gbwm/core/types.hpp"

namespace gbwm {

const GoalSet* Scenario::goal_at(int t) const {
  for (const auto& g : goals)
    if (g.t == t) return &g;
  return nullptr;
}

double Scenario::total_utility() const {
  double s = 0.0;
  for (const auto& g : goals) s += g.full_utility();
  return s;
}

void add_concurrent_goal(Scenario& s, int t, const std::vector<GoalOption>& levels) {
  GoalSet* set = nullptr;
  for (auto& g : s.goals)
    if (g.t == t) set = &g;
  if (!set) {
    s.goals.push_back(GoalSet{t, {GoalOption{0.0, 0.0}}, {}});
    set = &s.goals.back();
  }
  // Cross the existing combinations with this goal's levels plus "skip it".
  std::vector<GoalOption> expanded;
  expanded.reserve(set->raw.size() * (levels.size() + 1));
  for (const auto& base : set->raw) {
    expanded.push_back(base);
    for (const auto& lv : levels)
      expanded.push_back({base.cost + lv.cost, base.utility + lv.utility});
  }
  set->raw = std::move(expanded);
  set->front = build_pareto_front(set->raw);
}

void finalize_scenario(Scenario& s) {
  for (auto& g : s.goals)
    if (g.front.empty()) g.front = build_pareto_front(g.raw);
  std::erase_if(s.goals, [](const GoalSet& g) { return g.trivial(); });
  std::sort(s.goals.begin(), s.goals.end(),
            [](const GoalSet& a, const GoalSet& b) { return a.t < b.t; });
  if (s.infusions.size() < static_cast<std::size_t>(s.T + 1)) s.infusions.resize(s.T + 1, 0.0);
}

}  // namespace gbwm
