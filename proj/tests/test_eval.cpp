#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gbwm/dp/dp.hpp"
#include "gbwm/env/environment.hpp"
#include "gbwm/eval/eval.hpp"
#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"
#include "gbwm/util/rng.hpp"
#include "json.hpp"

using namespace gbwm;
using doctest::Approx;

namespace {

// Deliberately tight funding: paths split between the full and the partial
// goal takes, so utilities carry Monte Carlo variance.
Scenario ladder_scenario() {
  Scenario s;
  s.name = "ladder";
  s.T = 8;
  s.W0 = 55.0;
  s.infusions = {0.0, 6.0, 6.0, 0.0, 6.0, 6.0, 0.0, 6.0, 0.0};
  GoalSet g3;
  g3.t = 3;
  g3.raw = {{45.0, 60.0}, {25.0, 30.0}};
  GoalSet g8;
  g8.t = 8;
  g8.raw = {{70.0, 80.0}};
  s.goals = {g3, g8};
  s.portfolios = {{0.05, 0.07, 0.09, 0.11}, {0.05, 0.08, 0.12, 0.17}};
  finalize_scenario(s);
  return s;
}

Scenario single_goal(int T, double W0, double cost, double util) {
  Scenario s;
  s.name = "single-" + std::to_string(T);
  s.T = T;
  s.W0 = W0;
  s.infusions.assign(T + 1, 0.0);
  GoalSet g;
  g.t = T;
  g.raw = {{cost, util}};
  s.goals = {g};
  s.portfolios = {{0.05, 0.08}, {0.06, 0.12}};
  finalize_scenario(s);
  return s;
}

Scenario no_goal_scenario() {
  Scenario s;
  s.name = "drift";
  s.T = 4;
  s.W0 = 50.0;
  s.infusions = {0.0, 5.0, 0.0, 5.0, 0.0};
  s.portfolios = {{0.05, 0.09}, {0.06, 0.14}};
  finalize_scenario(s);
  return s;
}

PolicyEnsemble fresh_ensemble(int members, int input_dim) {
  PolicyEnsemble ens;
  ens.input_dim = input_dim;
  for (int i = 0; i < members; ++i) {
    EnsembleMember m;
    m.seed = static_cast<std::uint64_t>(i + 1);
    Rng rg(derive_seed(m.seed, "eval-init", 0));
    Rng rp(derive_seed(m.seed, "eval-init", 1));
    m.goal = init_agent(input_dim, rg);
    m.portfolio = init_agent(input_dim, rp);
    ens.members.push_back(std::move(m));
  }
  return ens;
}

// Freshly initialized actors hover near 0.5; scaling the head layer spreads
// the logits so decisions become crisp, and the bias tilts the goal agent
// toward taking. Gives trained-policy-shaped tables without training.
void sharpen(PolicyEnsemble& ens, double gain, double goal_bias = 0.0) {
  for (EnsembleMember& m : ens.members) {
    Mlp& ga = m.goal.actor;
    ga.W.back() *= gain;
    ga.b.back() *= gain;
    ga.b.back().array() += goal_bias;
    Mlp& pa = m.portfolio.actor;
    pa.W.back() *= gain;
    pa.b.back() *= gain;
  }
}

class MedianPolicy final : public Policy {
 public:
  explicit MedianPolicy(const PolicyEnsemble& ens) : ens_(&ens) {}
  double goal_action(const StateVector& s) override { return infer_action(*ens_, s).first; }
  double portfolio_action(const StateVector& s) override {
    return infer_action(*ens_, s).second;
  }

 private:
  const PolicyEnsemble* ens_;
};

EfficientFrontierSpec make_frontier(std::string name, double mu0, double s0, double mu1,
                                    double s1) {
  EfficientFrontierSpec f;
  f.name = std::move(name);
  f.anchor_mus = {mu0, 0.5 * (mu0 + mu1), mu1};
  f.anchor_sigmas = {s0, 0.46 * (s0 + s1), s1};
  f.count = 7;
  return f;
}

}  // namespace

TEST_CASE("nearest_node: log-distance picks, frozen from the reference script") {
  const std::vector<double> row = {0.0, 10.0, 20.0, 40.0, 80.0};
  CHECK(nearest_node(row, 0.0) == 0);
  CHECK(nearest_node(row, -5.0) == 0);
  CHECK(nearest_node(row, 1e-9) == 1);  // below every positive node
  CHECK(nearest_node(row, 10.0) == 1);
  CHECK(nearest_node(row, 14.0) == 1);
  CHECK(nearest_node(row, 14.1421356) == 1);  // just under the geometric midpoint
  CHECK(nearest_node(row, 14.15) == 2);
  CHECK(nearest_node(row, 28.28) == 2);
  CHECK(nearest_node(row, 28.3) == 3);
  CHECK(nearest_node(row, 500.0) == 4);  // above every node

  const std::vector<double> nozero = {5.0, 10.0};
  CHECK(nearest_node(nozero, 0.0) == 0);
  CHECK(nearest_node(nozero, 7.2) == 1);  // sqrt(50) = 7.07..

  CHECK_THROWS_AS(nearest_node(std::vector<double>{}, 1.0), InputError);
}

TEST_CASE("summarize: frozen reference stats") {
  const std::vector<double> mixed8 = {3.5, -1.0, 2.0, 2.0, 10.0, 0.5, 7.25, 4.0};
  const SummaryStats a = summarize(mixed8);
  CHECK(a.count == 8);
  CHECK(a.mean == Approx(3.53125).epsilon(1e-15));
  CHECK(a.stddev == Approx(3.3597746855258017).epsilon(1e-15));
  CHECK(a.min == -1.0);
  CHECK(a.q25 == Approx(1.625).epsilon(1e-15));
  CHECK(a.median == Approx(2.75).epsilon(1e-15));
  CHECK(a.q75 == Approx(4.8125).epsilon(1e-15));
  CHECK(a.max == 10.0);

  const SummaryStats b = summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(b.mean == Approx(3.0));
  CHECK(b.stddev == Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(b.q25 == Approx(2.0));
  CHECK(b.q75 == Approx(4.0));

  const SummaryStats c = summarize(std::vector<double>{42.0});
  CHECK(c.count == 1);
  CHECK(c.q25 == 42.0);
  CHECK(c.max == 42.0);

  CHECK(summarize(std::vector<double>{}).count == 0);
}

TEST_CASE("dp_tables: verbatim copy of the solver policy") {
  const Scenario s = ladder_scenario();
  const WealthGrid grid = build_wealth_grid(s, 50);
  const DPSolution sol = backward_pass(s, grid);
  const DecisionTables tb = dp_tables(sol);
  REQUIRE(tb.grid.nodes.size() == sol.grid.nodes.size());
  CHECK(tb.goal_choice == sol.goal_policy);
  CHECK(tb.portfolio == sol.portfolio_policy);

  const TextTable tt = tb.to_table();
  CHECK(tt.columns == std::vector<std::string>{"t", "wealth", "goal_choice", "portfolio"});
  std::size_t nodes = 0;
  for (const auto& row : grid.nodes) nodes += row.size();
  CHECK(tt.rows.size() == nodes);
}

TEST_CASE("table MC: panel determinism, prefix stability, SE scaling") {
  const Scenario s = ladder_scenario();
  const DPSolution sol = backward_pass(s, build_wealth_grid(s, 80));
  const DecisionTables tb = dp_tables(sol);

  const McResult a = mc_evaluate(tb, s, 1000, 31);
  const McResult b = mc_evaluate(tb, s, 1000, 31);
  CHECK(a.utilities == b.utilities);  // bitwise: same panel, same tables
  CHECK(a.mean / b.mean == 1.0);      // the policy-vs-itself ratio is exact

  // path i's shocks are keyed (panel, i), so a longer run extends the panel
  const McResult wide = mc_evaluate(tb, s, 4000, 31);
  for (int i : {0, 1, 499, 999})
    CHECK(wide.utilities[i] == a.utilities[i]);

  CHECK(a.std_error > 0.0);
  const double ratio = a.std_error / wide.std_error;
  CHECK(ratio == Approx(2.0).epsilon(0.15));  // SE shrinks like 1/sqrt(n)

  const McResult other = mc_evaluate(tb, s, 1000, 32);
  CHECK(other.mean != a.mean);  // different panel, different draws

  CHECK_THROWS_AS(mc_evaluate(tb, s, 0, 1), InputError);
}

TEST_CASE("table MC: no goals means exactly zero utility") {
  const Scenario s = no_goal_scenario();
  const DPSolution sol = backward_pass(s, build_wealth_grid(s, 40));
  const McResult r = mc_evaluate(dp_tables(sol), s, 200, 7);
  for (double u : r.utilities) CHECK(u == 0.0);
  CHECK(r.mean == 0.0);
  CHECK(r.std_error == 0.0);
}

TEST_CASE("rl_heatmap: deterministic tables, rejections, single-portfolio collapse") {
  const Scenario s = ladder_scenario();
  PolicyEnsemble ens = fresh_ensemble(3, kStateDim);
  sharpen(ens, 6.0, 1.0);
  const WealthGrid grid = build_wealth_grid(s, 60);

  const DecisionTables t1 = rl_heatmap(ens, s, grid);
  const DecisionTables t2 = rl_heatmap(ens, s, grid);
  CHECK(t1.goal_choice == t2.goal_choice);
  CHECK(t1.portfolio == t2.portfolio);
  REQUIRE(t1.goal_choice.size() == static_cast<std::size_t>(s.T) + 1);
  for (int t = 0; t <= s.T; ++t) {
    CHECK(t1.goal_choice[t].size() == grid.nodes[t].size());
    if (s.goal_at(t) == nullptr)
      for (int k : t1.goal_choice[t]) CHECK(k == 0);
  }

  Scenario solo = s;
  solo.portfolios = {{0.07}, {0.1}};
  const WealthGrid sgrid = build_wealth_grid(solo, 60);
  const DecisionTables ts = rl_heatmap(ens, solo, sgrid);
  for (const auto& row : ts.portfolio)
    for (int p : row) CHECK(p == 0);

  const PolicyEnsemble wide = fresh_ensemble(1, kStateDim + 1);
  CHECK_THROWS_AS(rl_heatmap(wide, s, grid), InputError);

  Scenario infl = s;
  infl.inflation = VasicekParams{0.6, 0.02, 0.01, 0.02};
  CHECK_THROWS_AS(rl_heatmap(ens, infl, grid), InputError);
  CHECK_THROWS_AS(mc_evaluate(dp_tables(backward_pass(s, grid)), infl, 10, 1), InputError);
}

TEST_CASE("live MC: batched evaluation matches per-path episode rolls") {
  const Scenario s = ladder_scenario();
  PolicyEnsemble ens = fresh_ensemble(3, kStateDim);
  sharpen(ens, 6.0, 1.0);

  const int n = 40;
  const std::uint64_t panel = 1234;
  const McResult live = mc_evaluate(ens, s, n, panel);

  const FeatureContext ctx(s);
  MedianPolicy pol(ens);
  for (int i = 0; i < n; ++i) {
    SeededShocks shocks(panel, static_cast<std::uint64_t>(i));
    const EpisodeTrace tr = run_episode(ctx, pol, shocks, 0.0);
    // batched forwards differ from single-state forwards only in the last ulp
    CHECK(live.utilities[i] == Approx(tr.total_utility).epsilon(1e-12));
  }

  CHECK_THROWS_AS(mc_evaluate(fresh_ensemble(1, kStateDim + 1), s, 4, 1), InputError);
}

TEST_CASE("live MC: inflation-aware paths match episode rolls") {
  Scenario s = ladder_scenario();
  s.inflation = VasicekParams{0.6, 0.02, 0.012, 0.02};
  PolicyEnsemble ens = fresh_ensemble(2, kStateDim + 1);
  sharpen(ens, 6.0, 1.0);

  const int n = 24;
  const std::uint64_t panel = 555;
  const McResult live = mc_evaluate(ens, s, n, panel);

  const FeatureContext ctx(s);
  MedianPolicy pol(ens);
  for (int i = 0; i < n; ++i) {
    SeededShocks shocks(panel, static_cast<std::uint64_t>(i));
    const EpisodeTrace tr = run_episode(ctx, pol, shocks, 0.0);
    CHECK(live.utilities[i] == Approx(tr.total_utility).epsilon(1e-12));
  }

  // a plain ensemble cannot read the rate dimension
  CHECK_THROWS_AS(mc_evaluate(fresh_ensemble(1, kStateDim), s, 4, 1), InputError);
}

TEST_CASE("grid tables stand in for the live policy within the MC tolerance") {
  const Scenario s = ladder_scenario();
  PolicyEnsemble ens = fresh_ensemble(3, kStateDim);
  sharpen(ens, 6.0, 3.0);

  const WealthGrid grid = build_wealth_grid(s, 400);
  const DecisionTables tb = rl_heatmap(ens, s, grid);
  const std::uint64_t panel = 99;
  const McResult live = mc_evaluate(ens, s, 2000, panel);
  const McResult tab = mc_evaluate(tb, s, 2000, panel);
  REQUIRE(live.mean > 1.0);  // the tilted policy takes goals
  CHECK(std::abs(tab.mean - live.mean) <= 0.01 * live.mean);
}

TEST_CASE("rl_efficiency: shared panel, ratio defined against the DP mean") {
  const Scenario s = ladder_scenario();
  PolicyEnsemble ens = fresh_ensemble(3, kStateDim);
  sharpen(ens, 6.0, 1.0);
  const DPSolution sol = backward_pass(s, build_wealth_grid(s, 80));

  const EfficiencyResult er = rl_efficiency(s, ens, sol, 500, 21);
  REQUIRE(er.efficiency.has_value());
  CHECK(*er.efficiency == Approx(er.rl.mean / er.dp.mean));
  CHECK(*er.efficiency > 0.0);
  CHECK(*er.efficiency < 1.5);

  // the DP leg is exactly the table run of the solver policy on that panel
  const McResult dp_again = mc_evaluate(dp_tables(sol), s, 500, 21);
  CHECK(er.dp.mean == dp_again.mean);

  const Scenario empty = no_goal_scenario();
  const DPSolution esol = backward_pass(empty, build_wealth_grid(empty, 40));
  const EfficiencyResult zer = rl_efficiency(empty, ens, esol, 100, 21);
  CHECK_FALSE(zer.efficiency.has_value());
}

TEST_CASE("evaluate_suite: schema, per-case slots, seed reproducibility") {
  std::vector<Scenario> cases = {ladder_scenario(), no_goal_scenario()};
  PolicyEnsemble ens = fresh_ensemble(2, kStateDim);
  sharpen(ens, 6.0, 1.0);
  EvalSettings st;
  st.n_paths = 400;
  st.nodes_per_step = 80;
  st.seed = 5;

  const EvaluationReport r1 = evaluate_suite(cases, ens, st);
  const EvaluationReport r2 = evaluate_suite(cases, ens, st);
  REQUIRE(r1.cases.size() == 2);
  CHECK(r1.cases[0].name == "ladder");
  CHECK(r1.cases[0].paths == 400);
  CHECK(r1.cases[0].dp_value > 0.0);
  REQUIRE(r1.cases[0].efficiency.has_value());
  CHECK_FALSE(r1.cases[1].efficiency.has_value());  // no goals, zero DP mean
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r1.cases[i].dp_value == r2.cases[i].dp_value);
    CHECK(r1.cases[i].dp_mean == r2.cases[i].dp_mean);
    CHECK(r1.cases[i].rl_mean == r2.cases[i].rl_mean);
  }
  CHECK(r1.efficiencies().size() == 1);
  CHECK(r1.efficiency_stats().count == 1);

  const TextTable tt = r1.to_table();
  CHECK(tt.columns.size() == 10);
  CHECK(tt.rows.size() == 2);
  CHECK_FALSE(tt.rows[1][4].has_value());  // efficiency column holds the gap

  const nlohmann::json j = nlohmann::json::parse(r1.summary_json());
  REQUIRE(j.contains("cases"));
  CHECK(j["cases"].size() == 2);
  CHECK(j["cases"][1]["efficiency"].is_null());
  CHECK(j["efficiency"]["count"] == 1);

  CHECK_THROWS_AS(evaluate_suite(cases, ens, EvalSettings{0, 80, 1}), InputError);
}

TEST_CASE("benchmark: per-case rows, goal-aware stats, table shape") {
  std::vector<Scenario> cases = {ladder_scenario(), no_goal_scenario()};
  PolicyEnsemble ens = fresh_ensemble(2, kStateDim);
  const BenchmarkReport rep = benchmark_runtimes(cases, ens, 50, 2);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.nodes_per_step == 50);
  CHECK(rep.rows[0].has_goal_timing);
  CHECK(rep.rows[0].rl_with_goal_ms > 0.0);
  CHECK_FALSE(rep.rows[1].has_goal_timing);  // no goal step to probe
  for (const auto& row : rep.rows) {
    CHECK(row.dp_backward_ms > 0.0);
    CHECK(row.rl_without_goal_ms > 0.0);
  }
  CHECK(rep.dp_stats().count == 2);
  CHECK(rep.with_goal_stats().count == 1);
  CHECK(rep.without_goal_stats().count == 2);

  const TextTable tt = rep.to_table();
  CHECK(tt.columns.size() == 4);
  CHECK_FALSE(tt.rows[1][2].has_value());

  CHECK_THROWS_AS(benchmark_runtimes({}, ens, 50, 2), InputError);
}

TEST_CASE("frontier study: rescale lands in the band; impossible bands throw") {
  Scenario partial;
  partial.name = "partial";
  partial.T = 6;
  partial.W0 = 90.0;
  partial.infusions.assign(7, 0.0);
  GoalSet g4;
  g4.t = 4;
  g4.raw = {{30.0, 20.0}, {60.0, 45.0}};
  GoalSet g6;
  g6.t = 6;
  g6.raw = {{50.0, 35.0}, {90.0, 70.0}};
  partial.goals = {g4, g6};
  partial.portfolios = {{0.05, 0.08}, {0.06, 0.12}};
  finalize_scenario(partial);

  std::vector<Scenario> cases = {single_goal(5, 100.0, 120.0, 10.0),
                                 single_goal(8, 80.0, 200.0, 5.0), partial};
  PolicyEnsemble ens = fresh_ensemble(2, kStateDim);
  sharpen(ens, 6.0, 1.0);
  const std::vector<EfficientFrontierSpec> frontiers = {
      make_frontier("base", 0.05, 0.05, 0.09, 0.20),
      make_frontier("alt", 0.06, 0.06, 0.11, 0.24)};

  // All-or-nothing goals turn the per-case fundedness into a staircase at
  // coarse grids; a handful of cases only smooths the mean so far, so this
  // mini study runs against a widened band. The desk-scale band stays at the
  // default [0.63, 0.64], where dozens of cases average the steps out.
  FrontierStudySettings st;
  st.n_paths = 120;
  st.nodes_per_step = 60;
  st.seed = 3;
  st.band_lo = 0.58;
  st.band_hi = 0.68;

  const auto rows = frontier_robustness_study(ens, frontiers, cases, st);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.fundedness >= st.band_lo);
    CHECK(row.fundedness <= st.band_hi);
    CHECK(row.wealth_scale > 0.0);
    CHECK(row.cases_counted == 3);
    CHECK(row.mean_efficiency > 0.0);
    CHECK(row.mean_efficiency < 1.5);
  }
  CHECK(rows[0].frontier == "base");

  // an infusion that funds the goal at any initial wealth leaves no bracket
  Scenario rich = single_goal(3, 1.0, 5.0, 10.0);
  rich.infusions[1] = 1000.0;
  CHECK_THROWS_AS(frontier_robustness_study(ens, frontiers, {rich}, st), NumericError);
}

TEST_CASE("inflation study: zero-rate cells reproduce the reference exactly") {
  const std::vector<Scenario> cases = {ladder_scenario()};
  PolicyEnsemble ens = fresh_ensemble(2, kStateDim + 1);
  sharpen(ens, 6.0, 1.0);

  const std::vector<double> thetas = {0.0, 0.03};
  const std::vector<double> kappas = {0.6};
  const std::vector<double> sigmas = {0.0, 0.01};
  const InflationStudy study = inflation_study(ens, thetas, kappas, sigmas, cases, 60, 17);

  REQUIRE(study.cells.size() == 4);
  CHECK(study.cells[0].theta == 0.0);
  CHECK(study.cells[0].sigma == 0.0);
  CHECK(study.cells[0].mean_utility == study.base_mean);  // bitwise
  CHECK(study.cells[0].ratio == 1.0);                     // exact by construction
  CHECK(study.cells[3].theta == 0.03);
  CHECK(study.cells[3].sigma == 0.01);
  CHECK(study.base_mean > 0.0);

  const TextTable tt = study.to_table();
  CHECK(tt.columns == std::vector<std::string>{"theta", "kappa", "sigma", "mean_utility",
                                               "ratio"});
  CHECK(tt.rows.size() == 4);

  CHECK_THROWS_AS(inflation_study(fresh_ensemble(1, kStateDim), thetas, kappas, sigmas,
                                  cases, 10, 1),
                  InputError);
  CHECK_THROWS_AS(inflation_study(ens, thetas, std::vector<double>{0.0}, sigmas, cases,
                                  10, 1),
                  InputError);
}

TEST_CASE("heatmap svg: layers, annotations, escaping") {
  const Scenario s = ladder_scenario();
  const DPSolution sol = backward_pass(s, build_wealth_grid(s, 40));
  const DecisionTables tb = dp_tables(sol);

  const std::string svg_p = heatmap_svg(tb, s, "portfolio", "Spend & <plan>");
  CHECK(svg_p.find("<svg") == 0);
  CHECK(svg_p.find("</svg>") != std::string::npos);
  CHECK(svg_p.find("linearGradient") != std::string::npos);
  CHECK(svg_p.find("<rect") != std::string::npos);
  CHECK(svg_p.find("#1f77b4") != std::string::npos);  // remaining-cost line
  CHECK(svg_p.find("#2ca02c") != std::string::npos);  // cumulative infusions
  CHECK(svg_p.find("#ff7f0e") != std::string::npos);  // initial-wealth tick
  CHECK(svg_p.find("Spend &amp; &lt;plan&gt;") != std::string::npos);
  CHECK(svg_p.find("Spend & <plan>") == std::string::npos);

  const std::string svg_g = heatmap_svg(tb, s, "goal", "goal layer");
  CHECK(svg_g.find("#fafafa") != std::string::npos);  // goal-free columns
  CHECK(svg_g == heatmap_svg(tb, s, "goal", "goal layer"));

  CHECK_THROWS_AS(heatmap_svg(tb, s, "value", "x"), InputError);
}
