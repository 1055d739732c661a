#include <algorithm>

#include "gbwm/core/types.hpp"

namespace gbwm {

std::vector<GoalOption> build_pareto_front(std::vector<GoalOption> options) {
  options.push_back({0.0, 0.0});
  std::sort(options.begin(), options.end(), [](const GoalOption& a, const GoalOption& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.utility > b.utility;
  });
  std::vector<GoalOption> front;
  double best_utility = -1.0;
  for (const auto& o : options) {
    if (o.utility > best_utility) {
      // A cheaper-or-equal option with at least this utility was already kept,
      // so anything that does not strictly improve utility is dominated.
      front.push_back(o);
      best_utility = o.utility;
    }
  }
  return front;
}

}  // namespace gbwm
