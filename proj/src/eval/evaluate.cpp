#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gbwm/env/environment.hpp"
#include "gbwm/eval/eval.hpp"
#include "gbwm/util/errors.hpp"
#include "gbwm/util/parallel.hpp"
#include "json.hpp"

namespace gbwm {

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// Matches the episode driver's action clamp; NaN collapses to 0.
double sane01(double x) {
  if (!(x >= 0.0)) return 0.0;
  return x > 1.0 ? 1.0 : x;
}

double sample_std_error(const std::vector<double>& xs, double mean) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

DecisionTables dp_tables(const DPSolution& sol) {
  return {sol.grid, sol.goal_policy, sol.portfolio_policy};
}

TextTable DecisionTables::to_table() const {
  TextTable t;
  t.columns = {"t", "wealth", "goal_choice", "portfolio"};
  for (std::size_t ti = 0; ti < grid.nodes.size(); ++ti)
    for (std::size_t i = 0; i < grid.nodes[ti].size(); ++i)
      t.rows.push_back({static_cast<double>(ti), grid.nodes[ti][i],
                        static_cast<double>(goal_choice[ti][i]),
                        static_cast<double>(portfolio[ti][i])});
  return t;
}

int nearest_node(std::span<const double> row, double w) {
  if (row.empty()) throw InputError("nearest_node: empty grid row");
  if (w <= 0.0) return 0;  // rows lead with the explicit zero node
  std::size_t lo = 0;
  while (lo < row.size() && row[lo] <= 0.0) ++lo;
  if (lo >= row.size()) return 0;
  const auto it = std::lower_bound(row.begin() + lo, row.end(), w);
  if (it == row.begin() + lo) return static_cast<int>(lo);
  if (it == row.end()) return static_cast<int>(row.size()) - 1;
  const std::size_t hi_idx = static_cast<std::size_t>(it - row.begin());
  const double logw = std::log(w);
  const double d_lo = logw - std::log(row[hi_idx - 1]);
  const double d_hi = std::log(row[hi_idx]) - logw;
  return static_cast<int>(d_lo <= d_hi ? hi_idx - 1 : hi_idx);
}

DecisionTables rl_heatmap(const PolicyEnsemble& ens, const Scenario& s,
                          const WealthGrid& grid) {
  if (s.inflation)
    throw InputError("rl_heatmap: stochastic inflation does not fit a (t, wealth) table");
  if (ens.input_dim != kStateDim)
    throw InputError("rl_heatmap: ensemble input width " + std::to_string(ens.input_dim) +
                     " does not match the scenario state width " + std::to_string(kStateDim));
  if (static_cast<int>(grid.nodes.size()) != s.T + 1)
    throw InputError("rl_heatmap: grid does not match the scenario horizon");

  const FeatureContext ctx(s);
  const int T = s.T, P = s.portfolios.size();
  DecisionTables tb;
  tb.grid = grid;
  tb.goal_choice.resize(T + 1);
  tb.portfolio.resize(T + 1);

  std::vector<StateVector> pre;
  for (int t = 0; t <= T; ++t) {
    const auto& nodes = grid.nodes[t];
    const int N = static_cast<int>(nodes.size());
    pre.assign(N, StateVector{});
    for (int i = 0; i < N; ++i) pre[i] = ctx.state_pre(t, nodes[i]);

    const GoalSet* gs = s.goal_at(t);
    const bool has_goal = gs && !gs->trivial();
    std::vector<int> kvec(N, 0);
    Eigen::MatrixXd X(ens.input_dim, N);
    if (has_goal) {
      for (int i = 0; i < N; ++i) pre[i].flatten(X.col(i).data());
      const Eigen::RowVectorXd ag = infer_goal_actions(ens, X);
      for (int i = 0; i < N; ++i)
        kvec[i] = map_goal_action_combo(sane01(ag(i)), nodes[i], gs->front, pre[i].best,
                                        pre[i].second);
    }
    for (int i = 0; i < N; ++i) {
      if (has_goal) {
        const double w_post = nodes[i] - gs->front[kvec[i]].cost;
        const StateVector post = ctx.state_post(pre[i], t, w_post);
        post.flatten(X.col(i).data());
      } else {
        pre[i].flatten(X.col(i).data());
      }
    }
    const Eigen::RowVectorXd ap = infer_portfolio_actions(ens, X);
    std::vector<int> pvec(N, 0);
    for (int i = 0; i < N; ++i) pvec[i] = map_portfolio_action(sane01(ap(i)), P);
    tb.goal_choice[t] = std::move(kvec);
    tb.portfolio[t] = std::move(pvec);
  }
  return tb;
}

McResult mc_evaluate(const DecisionTables& tables, const Scenario& s, int n_paths,
                     std::uint64_t panel_seed) {
  if (n_paths < 1) throw InputError("mc_evaluate: n_paths must be >= 1");
  if (s.inflation)
    throw InputError("mc_evaluate: decision tables cannot carry the inflation state");
  if (static_cast<int>(tables.grid.nodes.size()) != s.T + 1)
    throw InputError("mc_evaluate: tables do not match the scenario horizon");

  const int T = s.T;
  std::vector<double> w(n_paths, s.W0), util(n_paths, 0.0);
  std::vector<ShockSource> src;
  src.reserve(n_paths);
  for (int i = 0; i < n_paths; ++i) src.emplace_back(panel_seed, static_cast<std::uint64_t>(i));

  for (int t = 0; t <= T; ++t) {
    const auto& row = tables.grid.nodes[t];
    const auto& goal_row = tables.goal_choice[t];
    const auto& port_row = tables.portfolio[t];
    const GoalSet* gs = s.goal_at(t);
    const bool has_goal = gs && !gs->trivial();
    const double infusion_next = t < T ? s.infusion_at(t + 1) : 0.0;
    for (int i = 0; i < n_paths; ++i) {
      const int node = nearest_node(row, w[i]);
      double w_post = w[i];
      if (has_goal) {
        // The node's decision can overshoot the path's actual wealth; settle
        // for the nearest cheaper combination (entry 0 costs nothing).
        int k = goal_row[node];
        while (k > 0 && gs->front[k].cost > w[i]) --k;
        util[i] += gs->front[k].utility;
        w_post = w[i] - gs->front[k].cost;
      }
      if (t < T)
        w[i] = step_wealth(w_post, port_row[node], src[i].gbm(), s.portfolios, s.h,
                           infusion_next);
    }
  }

  McResult r;
  r.utilities = std::move(util);
  double sum = 0.0;
  for (double u : r.utilities) sum += u;
  r.mean = sum / n_paths;
  r.std_error = sample_std_error(r.utilities, r.mean);
  return r;
}

McResult mc_evaluate(const PolicyEnsemble& ens, const Scenario& s, int n_paths,
                     std::uint64_t panel_seed) {
  if (n_paths < 1) throw InputError("mc_evaluate: n_paths must be >= 1");
  const bool aware = s.inflation.has_value();
  const int dim_needed = aware ? kStateDim + 1 : kStateDim;
  if (ens.input_dim != dim_needed)
    throw InputError("mc_evaluate: ensemble input width " + std::to_string(ens.input_dim) +
                     " does not match the scenario state width " + std::to_string(dim_needed));

  const FeatureContext ctx(s);
  const int T = s.T, P = s.portfolios.size();
  std::vector<double> w(n_paths, s.W0), util(n_paths, 0.0);
  std::vector<InflationState> infl(n_paths);
  if (aware)
    for (auto& st : infl) st.rate = s.inflation->initial;
  std::vector<ShockSource> src;
  src.reserve(n_paths);
  for (int i = 0; i < n_paths; ++i) src.emplace_back(panel_seed, static_cast<std::uint64_t>(i));

  std::vector<StateVector> pre(n_paths);
  std::vector<double> w_post(n_paths);
  std::vector<GoalOption> front;
  Eigen::MatrixXd X(ens.input_dim, n_paths);

  for (int t = 0; t <= T; ++t) {
    const GoalSet* gs = s.goal_at(t);
    const bool has_goal = gs && !gs->trivial();
    for (int i = 0; i < n_paths; ++i)
      pre[i] = ctx.state_pre(t, w[i], aware ? &infl[i] : nullptr);

    if (has_goal) {
      for (int i = 0; i < n_paths; ++i) pre[i].flatten(X.col(i).data());
      const Eigen::RowVectorXd ag = infer_goal_actions(ens, X);
      for (int i = 0; i < n_paths; ++i) {
        front.assign(gs->front.begin(), gs->front.end());
        if (aware && infl[i].cum_past != 1.0)
          for (GoalOption& o : front) o.cost *= infl[i].cum_past;
        const int k = map_goal_action_combo(sane01(ag(i)), w[i], front, pre[i].best,
                                            pre[i].second);
        util[i] += front[k].utility;
        w_post[i] = w[i] - front[k].cost;
        const StateVector post = ctx.state_post(pre[i], t, w_post[i], aware ? &infl[i] : nullptr);
        post.flatten(X.col(i).data());
      }
    } else {
      for (int i = 0; i < n_paths; ++i) {
        w_post[i] = w[i];
        pre[i].flatten(X.col(i).data());
      }
    }

    const Eigen::RowVectorXd ap = infer_portfolio_actions(ens, X);
    if (t < T) {
      for (int i = 0; i < n_paths; ++i) {
        const int p = map_portfolio_action(sane01(ap(i)), P);
        const double z = src[i].gbm();
        double infusion_next = s.infusion_at(t + 1);
        if (aware) {
          const double zi = src[i].inflation();
          infl[i].cum_past *= std::exp(infl[i].rate * s.h);
          infl[i].rate = vasicek_step(infl[i].rate, *s.inflation, s.h, zi);
          infusion_next *= infl[i].cum_past;
        }
        w[i] = step_wealth(w_post[i], p, z, s.portfolios, s.h, infusion_next);
      }
    }
  }

  McResult r;
  r.utilities = std::move(util);
  double sum = 0.0;
  for (double u : r.utilities) sum += u;
  r.mean = sum / n_paths;
  r.std_error = sample_std_error(r.utilities, r.mean);
  return r;
}

EfficiencyResult rl_efficiency(const Scenario& s, const PolicyEnsemble& ens,
                               const DPSolution& dp, int n_paths,
                               std::uint64_t panel_seed) {
  EfficiencyResult r;
  const DecisionTables rlt = rl_heatmap(ens, s, dp.grid);
  r.dp = mc_evaluate(dp_tables(dp), s, n_paths, panel_seed);
  r.rl = mc_evaluate(rlt, s, n_paths, panel_seed);
  if (r.dp.mean != 0.0) r.efficiency = r.rl.mean / r.dp.mean;
  return r;
}

SummaryStats summarize(std::span<const double> xs) {
  SummaryStats st;
  st.count = static_cast<int>(xs.size());
  if (xs.empty()) return st;
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  st.mean = sum / st.count;
  double ss = 0.0;
  for (double x : v) ss += (x - st.mean) * (x - st.mean);
  st.stddev = std::sqrt(ss / st.count);
  const auto quantile = [&](double q) {
    const double pos = q * (st.count - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
  };
  st.min = v.front();
  st.q25 = quantile(0.25);
  st.median = quantile(0.5);
  st.q75 = quantile(0.75);
  st.max = v.back();
  return st;
}

namespace {

// Mean wall-clock ms for one full decision at the probe step: state build,
// agent queries, decision mappings. with_goal probes the first step carrying
// a nontrivial goal (both agents run, like the live pipeline); otherwise the
// first goal-free step (portfolio agent only). Returns 0 when no such step
// exists.
double time_rl_decision(const PolicyEnsemble& ens, const FeatureContext& ctx,
                        bool with_goal, int repeats) {
  const Scenario& s = ctx.scenario();
  const int P = s.portfolios.size();
  int t_probe = -1;
  for (int t = 0; t <= s.T; ++t) {
    const GoalSet* gs = s.goal_at(t);
    const bool has_goal = gs && !gs->trivial();
    if (has_goal == with_goal) {
      t_probe = t;
      break;
    }
  }
  if (t_probe < 0) return 0.0;

  const bool aware = ctx.inflation_aware();
  const InflationState infl{aware ? s.inflation->initial : 0.0, 1.0};
  const InflationState* ip = aware ? &infl : nullptr;
  const double w_probe = s.W0 > 0.0 ? s.W0 : 1.0;
  const GoalSet* gs = s.goal_at(t_probe);

  double sink = 0.0;
  const auto decide_once = [&] {
    const StateVector pre = ctx.state_pre(t_probe, w_probe, ip);
    Eigen::MatrixXd X(ens.input_dim, 1);
    double w_post = w_probe;
    if (with_goal) {
      pre.flatten(X.col(0).data());
      const Eigen::RowVectorXd ag = infer_goal_actions(ens, X);
      const int k = map_goal_action_combo(sane01(ag(0)), w_probe, gs->front, pre.best,
                                          pre.second);
      w_post = w_probe - gs->front[k].cost;
      const StateVector post = ctx.state_post(pre, t_probe, w_post, ip);
      post.flatten(X.col(0).data());
      sink += k;
    } else {
      pre.flatten(X.col(0).data());
    }
    const Eigen::RowVectorXd ap = infer_portfolio_actions(ens, X);
    sink += map_portfolio_action(sane01(ap(0)), P);
  };

  decide_once();  // warm caches before timing
  const double t0 = now_ms();
  for (int r = 0; r < repeats; ++r) decide_once();
  const double elapsed = now_ms() - t0;
  // keep the loop's results observable so the work cannot be elided
  volatile double keep = sink;
  (void)keep;
  return elapsed / repeats;
}

}  // namespace

std::vector<double> EvaluationReport::efficiencies() const {
  std::vector<double> out;
  for (const CaseReport& c : cases)
    if (c.efficiency) out.push_back(*c.efficiency);
  return out;
}

SummaryStats EvaluationReport::efficiency_stats() const {
  const auto effs = efficiencies();
  return summarize(effs);
}

TextTable EvaluationReport::to_table() const {
  TextTable t;
  t.columns = {"case",       "dp_value", "dp_mean", "rl_mean",
               "efficiency", "paths",    "dp_backward_ms",
               "rl_with_goal_ms", "rl_without_goal_ms", "rl_eval_ms"};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const CaseReport& c = cases[i];
    t.rows.push_back({static_cast<double>(i + 1), c.dp_value, c.dp_mean, c.rl_mean,
                      c.efficiency, static_cast<double>(c.paths), c.dp_backward_ms,
                      c.rl_with_goal_ms, c.rl_without_goal_ms, c.rl_eval_ms});
  }
  return t;
}

std::string EvaluationReport::summary_json() const {
  nlohmann::json j;
  const SummaryStats st = efficiency_stats();
  j["cases"] = nlohmann::json::array();
  for (const CaseReport& c : cases) {
    nlohmann::json row{{"name", c.name},
                       {"dp_value", c.dp_value},
                       {"dp_mean", c.dp_mean},
                       {"rl_mean", c.rl_mean},
                       {"paths", c.paths},
                       {"dp_backward_ms", c.dp_backward_ms},
                       {"rl_with_goal_ms", c.rl_with_goal_ms},
                       {"rl_without_goal_ms", c.rl_without_goal_ms},
                       {"rl_eval_ms", c.rl_eval_ms}};
    if (c.efficiency)
      row["efficiency"] = *c.efficiency;
    else
      row["efficiency"] = nullptr;
    j["cases"].push_back(std::move(row));
  }
  j["efficiency"] = {{"count", st.count},   {"mean", st.mean}, {"std", st.stddev},
                     {"min", st.min},       {"q25", st.q25},   {"median", st.median},
                     {"q75", st.q75},       {"max", st.max}};
  return j.dump(2) + "\n";
}

EvaluationReport evaluate_suite(const std::vector<Scenario>& cases,
                                const PolicyEnsemble& ens, const EvalSettings& st) {
  if (st.n_paths < 1) throw InputError("evaluate_suite: n_paths must be >= 1");
  if (st.nodes_per_step < 2) throw InputError("evaluate_suite: nodes_per_step must be >= 2");

  EvaluationReport report;
  report.cases.resize(cases.size());
  parallel_for(0, cases.size(), [&](std::size_t i) {
    const Scenario& s = cases[i];
    CaseReport cr;
    cr.name = s.name.empty() ? "case_" + std::to_string(i + 1) : s.name;
    cr.paths = st.n_paths;

    double t0 = now_ms();
    const WealthGrid grid = build_wealth_grid(s, st.nodes_per_step);
    const DPSolution sol = backward_pass(s, grid);
    cr.dp_backward_ms = now_ms() - t0;
    cr.dp_value = sol.value[0][nearest_node(grid.nodes[0], s.W0)];

    const FeatureContext ctx(s);
    cr.rl_with_goal_ms = time_rl_decision(ens, ctx, true, 8);
    cr.rl_without_goal_ms = time_rl_decision(ens, ctx, false, 8);

    t0 = now_ms();
    const std::uint64_t panel = derive_seed(st.seed, "panel", static_cast<std::uint64_t>(i));
    const DecisionTables rlt = rl_heatmap(ens, s, grid);
    const McResult dp_mc = mc_evaluate(dp_tables(sol), s, st.n_paths, panel);
    const McResult rl_mc = mc_evaluate(rlt, s, st.n_paths, panel);
    cr.rl_eval_ms = now_ms() - t0;
    cr.dp_mean = dp_mc.mean;
    cr.rl_mean = rl_mc.mean;
    if (dp_mc.mean != 0.0) cr.efficiency = rl_mc.mean / dp_mc.mean;
    report.cases[i] = std::move(cr);
  });
  return report;
}

BenchmarkReport benchmark_runtimes(const std::vector<Scenario>& cases,
                                   const PolicyEnsemble& ens, int nodes_per_step,
                                   int repeats) {
  if (cases.empty()) throw InputError("benchmark_runtimes: empty case set");
  if (repeats < 1) throw InputError("benchmark_runtimes: repeats must be >= 1");
  if (nodes_per_step < 2) throw InputError("benchmark_runtimes: nodes_per_step must be >= 2");

  BenchmarkReport rep;
  rep.nodes_per_step = nodes_per_step;
  rep.repeats = repeats;

  // One untimed solve of the smallest case warms allocators and code paths.
  {
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < cases.size(); ++i)
      if (cases[i].T < cases[smallest].T) smallest = i;
    const WealthGrid g = build_wealth_grid(cases[smallest], nodes_per_step);
    backward_pass(cases[smallest], g);
  }

  for (const Scenario& s : cases) {
    BenchmarkRow row;
    row.name = s.name;
    const FeatureContext ctx(s);
    row.rl_with_goal_ms = time_rl_decision(ens, ctx, true, repeats);
    row.rl_without_goal_ms = time_rl_decision(ens, ctx, false, repeats);
    row.has_goal_timing = row.rl_with_goal_ms > 0.0;
    const double t0 = now_ms();
    const WealthGrid grid = build_wealth_grid(s, nodes_per_step);
    backward_pass(s, grid);
    row.dp_backward_ms = now_ms() - t0;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SummaryStats BenchmarkReport::dp_stats() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.dp_backward_ms);
  return summarize(v);
}

SummaryStats BenchmarkReport::with_goal_stats() const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.has_goal_timing) v.push_back(r.rl_with_goal_ms);
  return summarize(v);
}

SummaryStats BenchmarkReport::without_goal_stats() const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.rl_without_goal_ms);
  return summarize(v);
}

TextTable BenchmarkReport::to_table() const {
  TextTable t;
  t.columns = {"case", "dp_backward_ms", "rl_with_goal_ms", "rl_without_goal_ms"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchmarkRow& r = rows[i];
    t.rows.push_back({static_cast<double>(i + 1), r.dp_backward_ms,
                      r.has_goal_timing ? std::optional<double>(r.rl_with_goal_ms)
                                        : std::nullopt,
                      r.rl_without_goal_ms});
  }
  return t;
}

}  // namespace gbwm
