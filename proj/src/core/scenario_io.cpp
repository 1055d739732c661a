#include "gbwm/core/scenario_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gbwm/util/errors.hpp"
#include "json.hpp"

namespace gbwm {

using nlohmann::json;
namespace fs = std::filesystem;

static json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw InputError(path + ": not valid JSON (" + e.what() + ")");
  }
}

static double need_number(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw InputError(ctx + ": missing field '" + key + "'");
  if (!j[key].is_number()) throw InputError(ctx + ": field '" + key + "' must be a number");
  return j[key].get<double>();
}

EfficientFrontierSpec load_frontier(const std::string& path) {
  const json j = read_json_file(path);
  EfficientFrontierSpec f;
  f.name = j.value("name", fs::path(path).stem().string());
  if (!j.contains("anchors") || !j["anchors"].is_array() || j["anchors"].size() < 2)
    throw InputError(path + ": needs an 'anchors' array of at least 2 [return, vol] pairs");
  for (const auto& a : j["anchors"]) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      throw InputError(path + ": 'anchors' entries must be [return, vol] pairs");
    f.anchor_mus.push_back(a[0].get<double>());
    f.anchor_sigmas.push_back(a[1].get<double>());
  }
  if (j.contains("count")) {
    const double c = need_number(j, "count", path);
    if (c != static_cast<int>(c) || c < 2)
      throw InputError(path + ": field 'count' must be an integer >= 2");
    f.count = static_cast<int>(c);
  }
  return f;
}

void save_frontier(const EfficientFrontierSpec& f, const std::string& path) {
  json anchors = json::array();
  for (std::size_t k = 0; k < f.anchor_mus.size(); ++k)
    anchors.push_back(json::array({f.anchor_mus[k], f.anchor_sigmas[k]}));
  json j{{"name", f.name}, {"anchors", anchors}, {"count", f.count}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

Scenario parse_scenario_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario: not valid JSON (") + e.what() + ")");
  }
  const std::string ctx = j.value("name", std::string("scenario"));
  Scenario s;
  s.name = j.value("name", std::string(""));
  const double horizon = need_number(j, "horizon", ctx);
  if (horizon != static_cast<int>(horizon))
    throw InputError(ctx + ": field 'horizon' must be an integer");
  s.T = static_cast<int>(horizon);
  s.h = j.contains("step_years") ? need_number(j, "step_years", ctx) : 1.0;
  s.W0 = need_number(j, "initial_wealth", ctx);
  s.notes = j.value("notes", std::string(""));

  if (s.T < 1) throw InputError(ctx + ": field 'horizon' must be at least 1");
  s.infusions.assign(s.T + 1, 0.0);
  if (j.contains("infusions")) {
    if (!j["infusions"].is_array())
      throw InputError(ctx + ": field 'infusions' must be an array of [t, amount]");
    for (const auto& e : j["infusions"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw InputError(ctx + ": field 'infusions' entries must be [t, amount] pairs");
      const double td = e[0].get<double>();
      const int t = static_cast<int>(td);
      if (td != t || t < 0 || t > s.T)
        throw InputError(ctx + ": field 'infusions' has a time outside 0..horizon");
      s.infusions[t] += e[1].get<double>();
    }
  }

  if (!j.contains("goals") || !j["goals"].is_array())
    throw InputError(ctx + ": missing field 'goals' (array)");
  for (const auto& g : j["goals"]) {
    const double td = need_number(g, "t", ctx + ".goals");
    const int t = static_cast<int>(td);
    if (td != t || t < 0 || t > s.T)
      throw InputError(ctx + ": goal time outside 0..horizon");
    if (!g.contains("options") || !g["options"].is_array() || g["options"].empty())
      throw InputError(ctx + ": goal at t=" + std::to_string(t) +
                       " needs a non-empty 'options' array");
    std::vector<GoalOption> levels;
    for (const auto& o : g["options"]) {
      if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number())
        throw InputError(ctx + ": goal options must be [cost, utility] pairs");
      levels.push_back({o[0].get<double>(), o[1].get<double>()});
    }
    add_concurrent_goal(s, t, levels);
  }

  if (!j.contains("portfolios") || !j["portfolios"].is_object())
    throw InputError(ctx + ": missing field 'portfolios'");
  const json& p = j["portfolios"];
  if (p.contains("frontier")) {
    if (!p["frontier"].is_string())
      throw InputError(ctx + ": field 'portfolios.frontier' must be a path string");
    fs::path fp = p["frontier"].get<std::string>();
    if (fp.is_relative()) fp = fs::path(base_dir) / fp;
    EfficientFrontierSpec spec = load_frontier(fp.string());
    if (p.contains("count")) {
      const double cd = need_number(p, "count", ctx + ".portfolios");
      if (cd != static_cast<int>(cd) || cd < 2)
        throw InputError(ctx + ": field 'portfolios.count' must be an integer >= 2");
      spec.count = static_cast<int>(cd);
    }
    s.portfolios = discretize_frontier(spec);
  } else {
    if (!p.contains("mus") || !p.contains("sigmas") || !p["mus"].is_array() ||
        !p["sigmas"].is_array())
      throw InputError(ctx + ": field 'portfolios' needs 'mus' and 'sigmas' arrays");
    for (const auto& v : p["mus"]) {
      if (!v.is_number()) throw InputError(ctx + ": field 'portfolios.mus' must be numeric");
      s.portfolios.mus.push_back(v.get<double>());
    }
    for (const auto& v : p["sigmas"]) {
      if (!v.is_number()) throw InputError(ctx + ": field 'portfolios.sigmas' must be numeric");
      s.portfolios.sigmas.push_back(v.get<double>());
    }
    if (s.portfolios.mus.size() != s.portfolios.sigmas.size())
      throw InputError(ctx + ": field 'portfolios' mus/sigmas length mismatch");
  }

  if (j.contains("inflation") && !j["inflation"].is_null()) {
    const json& v = j["inflation"];
    VasicekParams vp;
    vp.kappa = need_number(v, "kappa", ctx + ".inflation");
    vp.theta = need_number(v, "theta", ctx + ".inflation");
    vp.sigma = need_number(v, "sigma", ctx + ".inflation");
    vp.initial = need_number(v, "initial", ctx + ".inflation");
    s.inflation = vp;
  }

  finalize_scenario(s);
  const auto violations = validate_scenario(s);
  if (!violations.empty()) throw InputError(ctx + ": " + violations.front());
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    Scenario s = parse_scenario_json(buf.str(), fs::path(path).parent_path().string());
    if (s.name.empty()) s.name = fs::path(path).stem().string();
    return s;
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void save_scenario(const Scenario& s, const std::string& path) {
  json j;
  j["name"] = s.name;
  j["horizon"] = s.T;
  j["step_years"] = s.h;
  j["initial_wealth"] = s.W0;
  json inf = json::array();
  for (int t = 0; t <= s.T && t < static_cast<int>(s.infusions.size()); ++t)
    if (s.infusions[t] != 0.0) inf.push_back(json::array({t, s.infusions[t]}));
  if (!inf.empty()) j["infusions"] = inf;
  json goals = json::array();
  for (const auto& g : s.goals) {
    // Persist the combination set directly: reloading treats it as one goal
    // whose levels are the nonzero raw combinations, which reproduces the
    // same frontier.
    json opts = json::array();
    for (const auto& o : g.raw)
      if (o.cost != 0.0 || o.utility != 0.0) opts.push_back(json::array({o.cost, o.utility}));
    goals.push_back(json{{"t", g.t}, {"options", opts}});
  }
  j["goals"] = goals;
  j["portfolios"] = json{{"mus", s.portfolios.mus}, {"sigmas", s.portfolios.sigmas}};
  if (s.inflation)
    j["inflation"] = json{{"kappa", s.inflation->kappa},
                          {"theta", s.inflation->theta},
                          {"sigma", s.inflation->sigma},
                          {"initial", s.inflation->initial}};
  if (!s.notes.empty()) j["notes"] = s.notes;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

Suite load_suite(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  const json j = read_json_file(mpath.string());
  Suite suite;
  suite.name = j.value("name", fs::path(dir).filename().string());
  if (!j.contains("cases") || !j["cases"].is_array() || j["cases"].empty())
    throw InputError(mpath.string() + ": missing non-empty 'cases' array");
  for (const auto& c : j["cases"]) {
    if (!c.is_string()) throw InputError(mpath.string() + ": 'cases' must be path strings");
    fs::path p = c.get<std::string>();
    if (p.is_relative()) p = fs::path(dir) / p;
    suite.paths.push_back(p.string());
  }
  return suite;
}

}  // namespace gbwm
