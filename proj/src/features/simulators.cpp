#include <algorithm>
#include <cmath>
#include <utility>

#include "gbwm/features/features.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

// Greedy spend simulation shared by g_sim, p_sim and the combination matrix.
// Priorities, infusion eligibility and the draining order are fixed here and
// mirrored verbatim by the test oracles: goals scanned by (utility desc, time
// asc), unaffordable ones skipped; when paying, infusions at offsets <= the
// goal's offset are drained most-recent-first, wealth last.
class SpendEngine {
 public:
  explicit SpendEngine(const HorizonView& view) : costs_(view.costs), utils_(view.utilities) {
    const int L = static_cast<int>(view.costs.size());
    for (int d = 0; d < L; ++d) {
      if (view.costs[d] > 0.0) order_.push_back(d);
      if (d < static_cast<int>(view.infusions.size()) && view.infusions[d] != 0.0)
        inf_.emplace_back(d, view.infusions[d]);
    }
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (utils_[a] != utils_[b]) return utils_[a] > utils_[b];
      return a < b;
    });
    inf_disc_.resize(inf_.size());
  }

  bool goal_now() const { return !costs_.empty() && costs_[0] > 0.0; }

  // One pass under discount factors f. `forced` (if any) is attempted first
  // at offset 0; `include_current` controls whether offset 0 participates in
  // the ordinary priority scan.
  double run(const double* f, double wealth, const GoalOption* forced,
             bool include_current) {
    for (std::size_t k = 0; k < inf_.size(); ++k)
      inf_disc_[k] = inf_[k].second * f[inf_[k].first];
    wealth_ = wealth;
    double total = 0.0;
    if (forced) {
      if (try_pay(0, forced->cost * f[0])) total += forced->utility;
    }
    for (int d : order_) {
      if (!include_current && d == 0) continue;
      if (try_pay(d, costs_[d] * f[d])) total += utils_[d];
    }
    return total;
  }

 private:
  bool try_pay(int d, double c) {
    double avail = wealth_;
    std::size_t last = 0;  // one past the last eligible infusion
    while (last < inf_.size() && inf_[last].first <= d) ++last;
    for (std::size_t k = 0; k < last; ++k) avail += inf_disc_[k];
    if (avail < c) return false;
    double rem = c;
    for (std::size_t k = last; k-- > 0 && rem > 0.0;) {
      const double take = std::min(inf_disc_[k], rem);
      inf_disc_[k] -= take;
      rem -= take;
    }
    if (rem > 0.0) wealth_ -= rem;
    return true;
  }

  std::span<const double> costs_, utils_;
  std::vector<int> order_;
  std::vector<std::pair<int, double>> inf_;
  std::vector<double> inf_disc_;
  double wealth_ = 0.0;
};

}  // namespace

namespace detail {

std::vector<double> factor_table(const PortfolioSet& ps, std::span<const double> zgrid,
                                 int len, double h) {
  const int P = ps.size(), n = static_cast<int>(zgrid.size());
  std::vector<double> tab(static_cast<std::size_t>(P) * n * len);
  std::size_t at = 0;
  for (int p = 0; p < P; ++p)
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < len; ++d)
        tab[at++] = discount_factor(ps.mus[p], ps.sigmas[p], h, zgrid[i], d);
  return tab;
}

double g_sim_tab(const HorizonView& view, double wealth, int P,
                 std::span<const double> zgrid, const double* ftab, int stride) {
  SpendEngine eng(view);
  if (!eng.goal_now()) throw InputError("g_sim: no goal at the current step");
  const GoalOption current{view.costs[0], view.utilities[0]};
  const int n = static_cast<int>(zgrid.size());
  double max_take = 0.0, max_skip = 0.0;
  for (int p = 0; p < P; ++p) {
    double take = 0.0, skip = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* f = ftab + (static_cast<std::size_t>(p) * n + i) * stride;
      take += eng.run(f, wealth, &current, false);
      skip += eng.run(f, wealth, nullptr, false);
    }
    take /= n;
    skip /= n;
    if (p == 0 || take > max_take) max_take = take;
    if (p == 0 || skip > max_skip) max_skip = skip;
  }
  if (max_take <= 0.0) return 0.5;
  return logistic((max_take - max_skip) / max_take);
}

double p_sim_tab(const HorizonView& view, double wealth, int P,
                 std::span<const double> zgrid, const double* ftab, int stride) {
  if (P <= 1) return 0.0;
  SpendEngine eng(view);
  const int n = static_cast<int>(zgrid.size());
  int best = 0;
  double best_val = 0.0;
  for (int p = 0; p < P; ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* f = ftab + (static_cast<std::size_t>(p) * n + i) * stride;
      v += eng.run(f, wealth, nullptr, true);
    }
    v /= n;
    if (p == 0 || v > best_val) {
      best_val = v;
      best = p;
    }
  }
  return static_cast<double>(best) / static_cast<double>(P - 1);
}

GoalSignals goal_signals_tab(const HorizonView& view, std::span<const GoalOption> front,
                             double wealth, int P, std::span<const double> zgrid,
                             const double* ftab, int stride) {
  if (front.size() < 2) throw InputError("goal_signals: front needs at least 2 entries");
  GoalSignals out;
  if (front.size() == 2) {
    // All-or-nothing: take-vs-skip simulation, threshold picks entry 1 over 0.
    out.g = g_sim_tab(view, wealth, P, zgrid, ftab, stride);
    out.p = p_sim_tab(view, wealth, P, zgrid, ftab, stride);
    out.best = 1;
    out.second = 0;
    return out;
  }

  const int n = static_cast<int>(zgrid.size());
  const int m = static_cast<int>(front.size());
  SpendEngine eng(view);
  std::vector<double> E(static_cast<std::size_t>(P) * m, 0.0);
  for (int p = 0; p < P; ++p) {
    for (int i = 0; i < n; ++i) {
      const double* f = ftab + (static_cast<std::size_t>(p) * n + i) * stride;
      for (int q = 0; q < m; ++q)
        E[static_cast<std::size_t>(p) * m + q] += eng.run(f, wealth, &front[q], false);
    }
    for (int q = 0; q < m; ++q) E[static_cast<std::size_t>(p) * m + q] /= n;
  }

  std::vector<double> col_max(m);
  for (int q = 0; q < m; ++q) {
    double v = E[q];
    for (int p = 1; p < P; ++p) v = std::max(v, E[static_cast<std::size_t>(p) * m + q]);
    col_max[q] = v;
  }
  int best = 0;
  for (int q = 1; q < m; ++q)
    if (col_max[q] > col_max[best]) best = q;
  int second = best == 0 ? 1 : 0;
  for (int q = 0; q < m; ++q) {
    if (q == best) continue;
    if (col_max[q] > col_max[second]) second = q;
  }
  out.best = best;
  out.second = second;
  out.g = col_max[best] > 0.0 ? logistic((col_max[best] - col_max[second]) / col_max[best])
                              : 0.5;

  int best_p = 0;
  double best_e = E[0];
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < m; ++q)
      if (E[static_cast<std::size_t>(p) * m + q] > best_e) {
        best_e = E[static_cast<std::size_t>(p) * m + q];
        best_p = p;
      }
  out.p = P > 1 ? static_cast<double>(best_p) / static_cast<double>(P - 1) : 0.0;
  return out;
}

}  // namespace detail

double g_sim(const HorizonView& view, double wealth, const PortfolioSet& ps, double h,
             std::span<const double> zgrid) {
  const int L = static_cast<int>(view.costs.size());
  const auto tab = detail::factor_table(ps, zgrid, L, h);
  return detail::g_sim_tab(view, wealth, ps.size(), zgrid, tab.data(), L);
}

double p_sim(const HorizonView& view, double wealth, const PortfolioSet& ps, double h,
             std::span<const double> zgrid) {
  const int L = static_cast<int>(view.costs.size());
  const auto tab = detail::factor_table(ps, zgrid, L, h);
  return detail::p_sim_tab(view, wealth, ps.size(), zgrid, tab.data(), L);
}

GoalSignals goal_signals(const HorizonView& view, std::span<const GoalOption> front,
                         double wealth, const PortfolioSet& ps, double h,
                         std::span<const double> zgrid) {
  const int L = static_cast<int>(view.costs.size());
  const auto tab = detail::factor_table(ps, zgrid, L, h);
  return detail::goal_signals_tab(view, front, wealth, ps.size(), zgrid, tab.data(), L);
}

}  // namespace gbwm
