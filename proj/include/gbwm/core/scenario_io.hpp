#pragma once

#include <string>
#include <vector>

#include "gbwm/core/types.hpp"

namespace gbwm {

// Scenario files are JSON. Goals are listed as {"t", "options": [[cost,
// utility], ...]} entries; several entries may share a time, in which case
// they are concurrent goals and their combinations are formed on load.
// Portfolios are either explicit {"mus", "sigmas"} or {"frontier": <path
// relative to the scenario file>, "count": P}.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& text, const std::string& base_dir);
void save_scenario(const Scenario& s, const std::string& path);

EfficientFrontierSpec load_frontier(const std::string& path);
void save_frontier(const EfficientFrontierSpec& f, const std::string& path);

// A suite is a directory with a manifest.json naming scenario files in order.
struct Suite {
  std::string name;
  std::vector<std::string> paths;  // resolved scenario paths
};
Suite load_suite(const std::string& dir);

}  // namespace gbwm
