#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gbwm/env/environment.hpp"
#include "gbwm/util/errors.hpp"

using namespace gbwm;

namespace {

struct ScriptedPolicy final : Policy {
  std::function<double(const StateVector&)> g = [](const StateVector&) { return 1.0; };
  std::function<double(const StateVector&)> p = [](const StateVector&) { return 0.0; };
  double goal_action(const StateVector& s) override { return g(s); }
  double portfolio_action(const StateVector& s) override { return p(s); }
};

Scenario two_goal_scenario() {
  Scenario s;
  s.name = "hand";
  s.T = 2;
  s.W0 = 100.0;
  s.infusions = {0.0, 0.0, 0.0};
  GoalSet g1;
  g1.t = 1;
  g1.raw = {{40.0, 60.0}};
  GoalSet g2;
  g2.t = 2;
  g2.raw = {{50.0, 80.0}};
  s.goals = {g1, g2};
  s.portfolios.mus = {0.05};
  s.portfolios.sigmas = {0.05};
  return s;
}

}  // namespace

TEST_CASE("goal action mapping") {
  CHECK(map_goal_action(0.6, 100.0, 75.0) == 1);
  CHECK(map_goal_action(0.6, 50.0, 75.0) == 0);
  CHECK(map_goal_action(0.49, 100.0, 75.0) == 0);
  CHECK(map_goal_action(0.5, 75.0, 75.0) == 1);
}

TEST_CASE("combination goal action mapping") {
  const std::vector<GoalOption> front{{0.0, 0.0}, {75.0, 1.0}, {120.0, 1.4}};
  // selection by threshold
  CHECK(map_goal_action_combo(0.7, 200.0, front, 2, 1) == 2);
  CHECK(map_goal_action_combo(0.2, 200.0, front, 2, 1) == 1);
  // affordability fallback: best costs 120, wealth 100 -> most expensive affordable
  CHECK(map_goal_action_combo(0.9, 100.0, front, 2, 1) == 1);
  CHECK(map_goal_action_combo(0.9, 10.0, front, 2, 1) == 0);
  // two-option front reduces to the scalar mapping
  const std::vector<GoalOption> two{{0.0, 0.0}, {75.0, 1.0}};
  CHECK(map_goal_action_combo(0.7, 100.0, two, 1, 0) == map_goal_action(0.7, 100.0, 75.0));
  CHECK(map_goal_action_combo(0.7, 50.0, two, 1, 0) == 0);
  CHECK(map_goal_action_combo(0.3, 100.0, two, 1, 0) == 0);
}

TEST_CASE("portfolio action mapping") {
  CHECK(map_portfolio_action(0.5, 15) == 7);
  CHECK(map_portfolio_action(1.0, 15) == 14);
  CHECK(map_portfolio_action(0.0, 15) == 0);
  CHECK(map_portfolio_action(0.47, 15) == 7);
  CHECK(map_portfolio_action(0.999, 3) == 2);
  CHECK(map_portfolio_action(0.5, 1) == 0);
  CHECK_THROWS_AS(map_portfolio_action(0.5, 0), InputError);
}

TEST_CASE("wealth transition") {
  PortfolioSet ps{{0.08}, {0.12}};
  const double w = step_wealth(100.0, 0, 0.0, ps, 1.0, 0.0);
  CHECK(w == doctest::Approx(100.0 * std::exp(0.0728)).epsilon(1e-14));
  CHECK(step_wealth(0.0, 0, 1.7, ps, 1.0, 12.5) == 12.5);
  // mu = sigma^2/2 and z = 0 gives a unit growth factor
  PortfolioSet unit{{0.005}, {0.1}};
  CHECK(step_wealth(42.0, 0, 0.0, unit, 1.0, 3.0) == doctest::Approx(45.0).epsilon(1e-14));
}

TEST_CASE("vasicek transition") {
  VasicekParams v{0.6, 0.02, 0.0, 0.02};
  CHECK(vasicek_step(0.02, v, 1.0, 0.7) == doctest::Approx(0.02).epsilon(1e-15));
  VasicekParams fast{50.0, 0.02, 0.0, 0.02};
  CHECK(vasicek_step(0.09, fast, 1.0, 0.0) == doctest::Approx(0.02).epsilon(1e-10));
  VasicekParams bad{0.0, 0.02, 0.01, 0.02};
  CHECK_THROWS_AS(vasicek_step(0.02, bad, 1.0, 0.0), InputError);

  // Monte-Carlo moment check: ensemble mean within 3 standard errors
  VasicekParams vv{0.6, 0.02, 0.015, 0.02};
  Rng r(99);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += vasicek_step(0.05, vv, 1.0, r.normal());
  const double mean = sum / n;
  const double expect = 0.05 * std::exp(-0.6) + 0.02 * (1.0 - std::exp(-0.6));
  const double sd = 0.015 * std::sqrt((1.0 - std::exp(-1.2)) / 1.2);
  CHECK(std::abs(mean - expect) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("extrinsic reward") {
  // t < T: plain normalized utility
  CHECK(extrinsic_reward(2, 5, 1.0, 0.9, 500.0, 0.0, 0.0, 10.0) ==
        doctest::Approx(0.1).epsilon(1e-15));
  CHECK(extrinsic_reward(2, 5, 0.0, 0.0, 500.0, 0.0, 0.0, 10.0) == 0.0);
  // terminal partial credit: W = C/2 -> U/(8 SumU)
  CHECK(extrinsic_reward(5, 5, 0.0, 0.6, 50.0, 100.0, 4.0, 10.0) ==
        doctest::Approx(4.0 / (8.0 * 10.0)).epsilon(1e-15));
  CHECK(extrinsic_reward(5, 5, 0.0, 0.4, 50.0, 100.0, 4.0, 10.0) == 0.0);
  // attained utility at T wins over the credit
  CHECK(extrinsic_reward(5, 5, 4.0, 0.9, 500.0, 100.0, 4.0, 10.0) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(extrinsic_reward(0, 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), InputError);
}

TEST_CASE("intrinsic rewards") {
  auto [rg, rp] = intrinsic_rewards(0.7, 0.7, 0.5, 0.9, 1.0);
  CHECK(rg == 0.0);
  CHECK(rp == doctest::Approx(-0.2).epsilon(1e-15));
  auto [rg2, rp2] = intrinsic_rewards(1.0, 0.0, 0.3, 0.7, 1.0);
  CHECK(rg2 == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(rp2 == doctest::Approx(-0.2).epsilon(1e-15));
  auto [rg3, rp3] = intrinsic_rewards(0.0, 0.0, 0.1, 0.5, 0.25);
  CHECK(rg3 == 0.0);
  CHECK(rp3 == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("returns-to-go match a brute-force suffix sum") {
  EpisodeTrace tr;
  const std::vector<double> re{0.1, 0.0, 0.3, 0.05};
  const std::vector<double> rig{0.0, -0.2, 0.0, -0.1};
  const std::vector<double> rip{-0.05, -0.1, 0.0, -0.02};
  for (int t = 0; t < 4; ++t) {
    StepRecord s;
    s.t = t;
    s.r_e = re[t];
    if (t % 2 == 1 || t == 3) s.r_i_g = rig[t];
    s.r_i_p = rip[t];
    tr.steps.push_back(s);
  }
  auto [rg, rp] = returns_to_go(tr);
  for (int t = 0; t < 4; ++t) {
    double want_g = 0.0, want_p = 0.0;
    for (int u = t; u < 4; ++u) {
      want_g += re[u] + (tr.steps[u].r_i_g ? rig[u] : 0.0);
      want_p += rip[u];
      if (u > t) want_p += re[u];
    }
    CHECK(rg[t] == doctest::Approx(want_g).epsilon(1e-12));
    CHECK(rp[t] == doctest::Approx(want_p).epsilon(1e-12));
  }

  // degenerate single-step trace
  EpisodeTrace one;
  StepRecord s;
  s.r_e = 0.4;
  s.r_i_g = -0.1;
  s.r_i_p = -0.3;
  one.steps.push_back(s);
  auto [g1, p1] = returns_to_go(one);
  CHECK(g1[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(p1[0] == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("deterministic episode matches a hand computation") {
  Scenario s = two_goal_scenario();
  finalize_scenario(s);
  REQUIRE(validate_scenario(s).empty());
  FeatureContext ctx(s);
  ScriptedPolicy pol;  // always take, most conservative portfolio
  ZeroShocks z;
  EpisodeTrace tr = run_episode(ctx, pol, z, 0.0);

  const double g = std::exp(0.05 - 0.5 * 0.05 * 0.05);
  REQUIRE(tr.steps.size() == 3);
  CHECK(tr.steps[0].wealth_pre == 100.0);
  CHECK(tr.steps[1].wealth_pre == doctest::Approx(100.0 * g).epsilon(1e-14));
  CHECK(tr.steps[1].goal_decision == 1);
  CHECK(tr.steps[1].utility_attained == 60.0);
  const double w1_post = 100.0 * g - 40.0;
  CHECK(tr.steps[2].wealth_pre == doctest::Approx(w1_post * g).epsilon(1e-14));
  CHECK(tr.steps[2].utility_attained == 80.0);
  CHECK(tr.total_utility == 140.0);
  CHECK(tr.steps[1].r_e == doctest::Approx(60.0 / 140.0).epsilon(1e-14));
  CHECK(tr.steps[2].r_e == doctest::Approx(80.0 / 140.0).epsilon(1e-14));
  CHECK(tr.R_g[0] == doctest::Approx(1.0).epsilon(1e-12));
  // R_p(0) excludes r_e(0) = 0 but includes everything after
  CHECK(tr.R_p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.R_p[2] == 0.0);
  CHECK(tr.clamped_actions == 0);

  // never-take policy collects nothing; terminal credit indicator off
  ScriptedPolicy never;
  never.g = [](const StateVector&) { return 0.0; };
  EpisodeTrace none = run_episode(ctx, never, z, 0.0);
  CHECK(none.total_utility == 0.0);
  for (const auto& st : none.steps) CHECK(st.r_e == 0.0);

  // wanting the terminal goal but falling short earns the quarter credit
  ScriptedPolicy eager;
  EpisodeTrace broke = run_episode(ctx, eager, z, 0.0, kGoalThreshold, 45.0);
  const StepRecord& last = broke.steps.back();
  if (last.utility_attained == 0.0 && last.wealth_pre < 50.0) {
    CHECK(last.r_e ==
          doctest::Approx(0.25 * (last.wealth_pre / 50.0) * 80.0 / 140.0).epsilon(1e-12));
  }
}

TEST_CASE("episodes are deterministic under a fixed seed") {
  Scenario s = two_goal_scenario();
  finalize_scenario(s);
  FeatureContext ctx(s);
  ScriptedPolicy pol;
  pol.g = [](const StateVector& sv) { return sv.g; };
  pol.p = [](const StateVector& sv) { return sv.p; };
  SeededShocks a(123, 7), b(123, 7);
  EpisodeTrace ta = run_episode(ctx, pol, a, 0.5);
  EpisodeTrace tb = run_episode(ctx, pol, b, 0.5);
  REQUIRE(ta.steps.size() == tb.steps.size());
  for (std::size_t i = 0; i < ta.steps.size(); ++i) {
    CHECK(ta.steps[i].wealth_pre == tb.steps[i].wealth_pre);
    CHECK(ta.steps[i].r_e == tb.steps[i].r_e);
    CHECK(ta.steps[i].r_i_p == tb.steps[i].r_i_p);
    CHECK(ta.steps[i].p_action == tb.steps[i].p_action);
  }
  SeededShocks c(123, 8);
  EpisodeTrace tc = run_episode(ctx, pol, c, 0.5);
  bool same = true;
  for (std::size_t i = 0; i < ta.steps.size(); ++i)
    if (ta.steps[i].wealth_pre != tc.steps[i].wealth_pre) same = false;
  CHECK(!same);
}

TEST_CASE("out-of-range policy outputs are clamped and counted") {
  Scenario s = two_goal_scenario();
  finalize_scenario(s);
  FeatureContext ctx(s);
  ScriptedPolicy pol;
  pol.g = [](const StateVector&) { return 1.7; };
  pol.p = [](const StateVector&) { return -0.3; };
  ZeroShocks z;
  EpisodeTrace tr = run_episode(ctx, pol, z, 0.0);
  CHECK(tr.clamped_actions == 2 + 3);  // 2 goal queries, 3 portfolio queries
  for (const auto& st : tr.steps) {
    if (st.g_action) CHECK(*st.g_action == 1.0);
    CHECK(st.p_action == 0.0);
  }
}

TEST_CASE("inflation off reproduces the plain trace bit for bit") {
  Scenario plain = two_goal_scenario();
  finalize_scenario(plain);
  Scenario infl = plain;
  infl.inflation = VasicekParams{0.6, 0.0, 0.0, 0.0};
  FeatureContext ca(plain), cb(infl);
  ScriptedPolicy pol;
  pol.g = [](const StateVector& sv) { return sv.g; };
  pol.p = [](const StateVector& sv) { return sv.p; };
  SeededShocks sa(55, 3), sb(55, 3);
  EpisodeTrace ta = run_episode(ca, pol, sa, 0.7);
  EpisodeTrace tb = run_episode(cb, pol, sb, 0.7);
  REQUIRE(ta.steps.size() == tb.steps.size());
  CHECK(ta.total_utility == tb.total_utility);
  for (std::size_t i = 0; i < ta.steps.size(); ++i) {
    CHECK(ta.steps[i].wealth_pre == tb.steps[i].wealth_pre);
    CHECK(ta.steps[i].goal_decision == tb.steps[i].goal_decision);
    CHECK(ta.steps[i].portfolio_decision == tb.steps[i].portfolio_decision);
    CHECK(ta.steps[i].r_e == tb.steps[i].r_e);
    CHECK(tb.steps[i].inflation_rate.has_value());
    CHECK(*tb.steps[i].inflation_rate == 0.0);
  }
}

TEST_CASE("episode trace exports as a table") {
  Scenario s = two_goal_scenario();
  finalize_scenario(s);
  FeatureContext ctx(s);
  ScriptedPolicy pol;
  ZeroShocks z;
  EpisodeTrace tr = run_episode(ctx, pol, z, 0.25);
  TextTable t = tr.to_table();
  REQUIRE(t.rows.size() == 3);
  REQUIRE(t.columns.size() == 15);
  CHECK(!t.rows[0][2].has_value());   // no goal at t=0 -> no g_action
  CHECK(t.rows[1][2].has_value());
  CHECK(!t.rows[0][12].has_value());  // no inflation column content
  CHECK(t.rows[2][6].value() == 80.0);
}
