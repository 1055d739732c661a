#include "gbwm/dp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "gbwm/util/errors.hpp"
#include "gbwm/util/parallel.hpp"

namespace gbwm {

namespace {

const std::vector<GoalOption> kNoGoal = {GoalOption{0.0, 0.0}};

const std::vector<GoalOption>& options_at(const Scenario& s, int t) {
  const GoalSet* g = s.goal_at(t);
  return (g != nullptr && !g->front.empty()) ? g->front : kNoGoal;
}

void reject_inflation(const Scenario& s) {
  if (s.inflation.has_value()) {
    throw InputError(
        "dp: scenario has stochastic inflation; the grid solver only handles "
        "the (t, wealth) state. Strip the inflation block or use a trained "
        "policy for inflation-aware runs.");
  }
}

// Terminal rule: collect the most expensive affordable frontier entry.
void terminal_cell(const std::vector<GoalOption>& opts, double w, double* value,
                   int* choice) {
  double best = -1.0;
  int pick = 0;
  for (std::size_t k = 0; k < opts.size(); ++k) {
    if (opts[k].cost > w) continue;
    if (opts[k].utility > best) {
      best = opts[k].utility;
      pick = static_cast<int>(k);
    }
  }
  *value = std::max(best, 0.0);
  *choice = pick;
}

// Everything the continuation integral needs about the t+1 row: log of the
// pre-infusion landing wealth per node with positive support, plus values.
struct NextRow {
  std::vector<double> lx;   // log(node - infusion), ascending
  std::vector<double> cw;   // midpoint cell width around each landing wealth
  std::vector<double> val;  // values on those nodes
  std::span<const double> nodes;
  std::span<const double> full_val;
  double infusion = 0.0;
  double v_zero = 0.0;  // value after the deterministic zero-wealth jump

  NextRow(std::span<const double> nodes_, std::span<const double> val_, double inf)
      : nodes(nodes_), full_val(val_), infusion(inf) {
    std::vector<double> x;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double xj = nodes[j] - infusion;
      if (xj <= 0.0) continue;
      x.push_back(xj);
      lx.push_back(std::log(xj));
      val.push_back(full_val[j]);
    }
    cw.resize(x.size(), 1.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x.size() < 2) break;
      if (j == 0)
        cw[j] = x[1] - x[0];
      else if (j + 1 == x.size())
        cw[j] = x[j] - x[j - 1];
      else
        cw[j] = 0.5 * (x[j + 1] - x[j - 1]);
    }
    v_zero = full_val[nearest(infusion)];
  }

  std::size_t nearest(double target) const {
    std::size_t best = 0;
    double bd = std::abs(nodes[0] - target);
    for (std::size_t j = 1; j < nodes.size(); ++j) {
      const double d = std::abs(nodes[j] - target);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    return best;
  }

  // E[V(t+1, w * growth + infusion)] under the same normalized density-times-
  // cell-width weights as transition_probabilities, fused and pruned to the
  // +-12 sigma window around the density peak.
  double continuation(double w, double mu, double sigma, double h) const {
    if (w <= 0.0) return v_zero;
    const double s = sigma * std::sqrt(h);
    const double m = std::log(w) + (mu - 0.5 * sigma * sigma) * h;
    const double half = 12.0 * s + s * s;
    const auto lo = std::lower_bound(lx.begin(), lx.end(), m - half);
    const auto hi = std::upper_bound(lx.begin(), lx.end(), m + half);
    double num = 0.0;
    double den = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double d = (*it - m) / s;
      const double arg = -0.5 * d * d - *it;
      if (arg < -745.0) continue;
      const std::size_t j = static_cast<std::size_t>(it - lx.begin());
      const double dens = std::exp(arg) * cw[j];
      den += dens;
      num += dens * val[j];
    }
    if (den <= 0.0) return full_val[nearest(w * std::exp(mu * h) + infusion)];
    return num / den;
  }
};

// Continuation sampled on a dense log-spaced knot vector once per portfolio,
// then read by linear interpolation in log-wealth. Cuts the per-step cost
// from nodes x options x nodes to knots x window.
struct ContTable {
  double llo = 0.0;
  double step = 0.0;
  std::vector<std::vector<double>> per_p;  // [p][knot]
  double v_zero = 0.0;

  ContTable(const NextRow& nr, const PortfolioSet& ps, double h, double w_hi,
            int knots) {
    v_zero = nr.v_zero;
    const double k_lo = 1e-6;
    const double k_hi = std::max(w_hi, 2.0 * k_lo);
    llo = std::log(k_lo);
    const double lhi = std::log(k_hi);
    const int m = std::max(knots, 8);
    step = (lhi - llo) / (m - 1);
    per_p.assign(static_cast<std::size_t>(ps.size()), std::vector<double>());
    for (int p = 0; p < ps.size(); ++p) {
      auto& col = per_p[static_cast<std::size_t>(p)];
      col.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        const double w = std::exp(llo + step * i);
        col[static_cast<std::size_t>(i)] =
            nr.continuation(w, ps.mus[p], ps.sigmas[p], h);
      }
    }
  }

  double at(int p, double w) const {
    if (w <= 0.0) return v_zero;
    const auto& col = per_p[static_cast<std::size_t>(p)];
    const double u = (std::log(w) - llo) / step;
    if (u <= 0.0) return col.front();
    const double umax = static_cast<double>(col.size() - 1);
    if (u >= umax) return col.back();
    const std::size_t i0 = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i0);
    return col[i0] + f * (col[i0 + 1] - col[i0]);
  }
};

}  // namespace

DPSolution backward_pass(const Scenario& s, const WealthGrid& grid) {
  reject_inflation(s);
  if (static_cast<int>(grid.nodes.size()) != s.T + 1)
    throw InputError("dp: grid does not match the scenario horizon");
  const int P = s.portfolios.size();
  if (P < 1) throw InputError("dp: scenario has no portfolios");

  DPSolution sol;
  sol.grid = grid;
  sol.value.resize(grid.nodes.size());
  sol.goal_policy.resize(grid.nodes.size());
  sol.portfolio_policy.resize(grid.nodes.size());
  for (std::size_t t = 0; t < grid.nodes.size(); ++t) {
    const std::size_t n = grid.nodes[t].size();
    sol.value[t].assign(n, 0.0);
    sol.goal_policy[t].assign(n, 0);
    sol.portfolio_policy[t].assign(n, 0);
  }

  {  // t = T: no continuation, just the best affordable frontier entry
    const auto& opts = options_at(s, s.T);
    const auto& row = grid.nodes[static_cast<std::size_t>(s.T)];
    auto& val = sol.value[static_cast<std::size_t>(s.T)];
    auto& gp = sol.goal_policy[static_cast<std::size_t>(s.T)];
    for (std::size_t i = 0; i < row.size(); ++i) terminal_cell(opts, row[i], &val[i], &gp[i]);
  }

  for (int t = s.T - 1; t >= 0; --t) {
    const auto& row = grid.nodes[static_cast<std::size_t>(t)];
    const auto& next = grid.nodes[static_cast<std::size_t>(t) + 1];
    const NextRow nr(next, sol.value[static_cast<std::size_t>(t) + 1],
                     s.infusion_at(t + 1));
    const ContTable cont(nr, s.portfolios, s.h, row.back(),
                         4 * static_cast<int>(next.size()));
    const auto& opts = options_at(s, t);
    auto& val = sol.value[static_cast<std::size_t>(t)];
    auto& gp = sol.goal_policy[static_cast<std::size_t>(t)];
    auto& pp = sol.portfolio_policy[static_cast<std::size_t>(t)];

    parallel_for(0, row.size(), [&](std::size_t i) {
      const double w = row[i];
      double best = -std::numeric_limits<double>::infinity();
      int best_k = 0;
      int best_p = 0;
      for (int p = 0; p < P; ++p) {
        for (std::size_t k = 0; k < opts.size(); ++k) {
          if (opts[k].cost > w) continue;
          const double v = opts[k].utility + cont.at(p, w - opts[k].cost);
          if (v > best) {
            best = v;
            best_k = static_cast<int>(k);
            best_p = p;
          }
        }
      }
      val[i] = best;
      gp[i] = best_k;
      pp[i] = best_p;
    });
  }
  return sol;
}

double bellman_value_at(const DPSolution& sol, const Scenario& s, int t, double w) {
  if (t < 0 || t > s.T) throw InputError("dp: time index out of range");
  if (static_cast<int>(sol.value.size()) != s.T + 1)
    throw InputError("dp: solution does not match the scenario horizon");
  const auto& opts = options_at(s, t);
  if (t == s.T) {
    double v = 0.0;
    int pick = 0;
    terminal_cell(opts, w, &v, &pick);
    return v;
  }
  const auto& next = sol.grid.nodes[static_cast<std::size_t>(t) + 1];
  const NextRow nr(next, sol.value[static_cast<std::size_t>(t) + 1],
                   s.infusion_at(t + 1));
  double best = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < s.portfolios.size(); ++p) {
    for (std::size_t k = 0; k < opts.size(); ++k) {
      if (opts[k].cost > w) continue;
      const double v = opts[k].utility +
                       nr.continuation(w - opts[k].cost, s.portfolios.mus[p],
                                       s.portfolios.sigmas[p], s.h);
      if (v > best) best = v;
    }
  }
  return best;
}

DiscreteShocks DiscreteShocks::gauss3() {
  const double r = std::sqrt(3.0);
  return DiscreteShocks{{-r, 0.0, r}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}};
}

namespace {

double discrete_value(const Scenario& s, const DiscreteShocks& sh, int t, double w,
                      std::map<std::pair<int, double>, double>& memo) {
  const auto& opts = options_at(s, t);
  if (t == s.T) {
    double v = 0.0;
    int pick = 0;
    terminal_cell(opts, w, &v, &pick);
    return v;
  }
  const auto key = std::make_pair(t, w);
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  const int P = s.portfolios.size();
  const double inf_next = s.infusion_at(t + 1);
  double best = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < P; ++p) {
    const double mu = s.portfolios.mus[p];
    const double sg = s.portfolios.sigmas[p];
    for (std::size_t k = 0; k < opts.size(); ++k) {
      if (opts[k].cost > w) continue;
      const double w_post = w - opts[k].cost;
      double cont = 0.0;
      for (std::size_t i = 0; i < sh.z.size(); ++i) {
        const double g =
            std::exp((mu - 0.5 * sg * sg) * s.h + sh.z[i] * sg * std::sqrt(s.h));
        cont += sh.prob[i] * discrete_value(s, sh, t + 1, w_post * g + inf_next, memo);
      }
      best = std::max(best, opts[k].utility + cont);
    }
  }
  memo.emplace(key, best);
  return best;
}

}  // namespace

double discrete_exact_value(const Scenario& s, const DiscreteShocks& shocks) {
  reject_inflation(s);
  if (shocks.z.empty() || shocks.z.size() != shocks.prob.size())
    throw InputError("dp: malformed shock set");
  std::map<std::pair<int, double>, double> memo;
  return discrete_value(s, shocks, 0, s.W0, memo);
}

HeatmapExport policy_heatmap(const DPSolution& sol, const Scenario& s) {
  HeatmapExport hx;
  hx.cells.columns = {"t", "wealth", "value", "goal_choice", "portfolio"};
  for (std::size_t t = 0; t < sol.grid.nodes.size(); ++t) {
    const bool has_goal = s.goal_at(static_cast<int>(t)) != nullptr;
    for (std::size_t i = 0; i < sol.grid.nodes[t].size(); ++i) {
      std::vector<std::optional<double>> row(5);
      row[0] = static_cast<double>(t);
      row[1] = sol.grid.nodes[t][i];
      row[2] = sol.value[t][i];
      if (has_goal) row[3] = static_cast<double>(sol.goal_policy[t][i]);
      row[4] = static_cast<double>(sol.portfolio_policy[t][i]);
      hx.cells.rows.push_back(std::move(row));
    }
  }
  hx.meta.columns = {"t", "goal_cost", "infusion", "cum_infusion"};
  double cum = 0.0;
  for (int t = 0; t <= s.T; ++t) {
    cum += s.infusion_at(t);
    std::vector<std::optional<double>> row(4);
    row[0] = static_cast<double>(t);
    if (const GoalSet* g = s.goal_at(t); g != nullptr) row[1] = g->full_cost();
    row[2] = s.infusion_at(t);
    row[3] = cum;
    hx.meta.rows.push_back(std::move(row));
  }
  return hx;
}

DPSolution solution_from_heatmap(const HeatmapExport& hx) {
  const std::vector<std::string> want = {"t", "wealth", "value", "goal_choice",
                                         "portfolio"};
  if (hx.cells.columns != want)
    throw VersionError("policy table: unexpected column set");
  DPSolution sol;
  for (const auto& row : hx.cells.rows) {
    if (row.size() != 5 || !row[0] || !row[1] || !row[2] || !row[4])
      throw VersionError("policy table: malformed row");
    const auto t = static_cast<std::size_t>(std::llround(*row[0]));
    if (sol.grid.nodes.size() <= t) {
      sol.grid.nodes.resize(t + 1);
      sol.value.resize(t + 1);
      sol.goal_policy.resize(t + 1);
      sol.portfolio_policy.resize(t + 1);
    }
    sol.grid.nodes[t].push_back(*row[1]);
    sol.value[t].push_back(*row[2]);
    sol.goal_policy[t].push_back(row[3] ? static_cast<int>(std::llround(*row[3])) : 0);
    sol.portfolio_policy[t].push_back(static_cast<int>(std::llround(*row[4])));
  }
  for (std::size_t t = 0; t < sol.grid.nodes.size(); ++t) {
    if (sol.grid.nodes[t].empty())
      throw VersionError("policy table: missing rows for a time step");
    if (!std::is_sorted(sol.grid.nodes[t].begin(), sol.grid.nodes[t].end()))
      throw VersionError("policy table: wealth nodes out of order");
  }
  return sol;
}

}  // namespace gbwm
