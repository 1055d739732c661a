#include "gbwm/dp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

// Per-step growth factor under portfolio p with a z standard deviations shock.
double growth_factor(const PortfolioSet& ps, int p, double h, double z) {
  const double mu = ps.mus[p];
  const double sg = ps.sigmas[p];
  return std::exp((mu - 0.5 * sg * sg) * h + z * sg * std::sqrt(h));
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (hi <= lo || n < 2) {
    out.push_back(lo);
    return out;
  }
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    out.push_back(std::exp(llo + f * (lhi - llo)));
  }
  out.front() = lo;  // kill rounding at the endpoints
  out.back() = hi;
  return out;
}

}  // namespace

WealthGrid build_wealth_grid(const Scenario& s, int nodes_per_step) {
  if (nodes_per_step < 2) throw InputError("wealth grid: nodes_per_step must be at least 2");
  if (s.T < 1) throw InputError("wealth grid: horizon must be at least 1");
  const int P = s.portfolios.size();
  if (P < 1) throw InputError("wealth grid: scenario has no portfolios");

  // Widest one-step growth band across portfolios at +-4 standard deviations.
  double f_hi = 0.0;
  double f_lo = std::numeric_limits<double>::infinity();
  for (int p = 0; p < P; ++p) {
    f_hi = std::max(f_hi, growth_factor(s.portfolios, p, s.h, 4.0));
    f_lo = std::min(f_lo, growth_factor(s.portfolios, p, s.h, -4.0));
  }

  WealthGrid grid;
  grid.nodes.resize(static_cast<std::size_t>(s.T) + 1);
  grid.nodes[0] = {0.0, s.W0};
  if (s.W0 <= 0.0) grid.nodes[0] = {0.0, kGridFloor};

  double hi = std::max(s.W0, kGridFloor);
  double lo = std::max(s.W0, kGridFloor);
  bool goal_seen = false;  // a goal at tau < t lets wealth drop to ~0 by t
  for (int t = 1; t <= s.T; ++t) {
    if (s.goal_at(t - 1) != nullptr) goal_seen = true;
    const double inf = s.infusion_at(t);
    hi = hi * f_hi + inf;
    lo = goal_seen ? inf : lo * f_lo + inf;
    const double row_lo = std::max(lo, kGridFloor);
    const double row_hi = std::max(hi, row_lo * 2.0);

    std::vector<double> row = log_spaced(row_lo, row_hi, nodes_per_step);
    row.push_back(0.0);
    // The zero-wealth state jumps exactly onto the infusion, so keep that
    // wealth representable.
    if (inf > 0.0) row.push_back(inf);
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    grid.nodes[static_cast<std::size_t>(t)] = std::move(row);
  }
  return grid;
}

std::vector<double> transition_probabilities(double w_from, int p,
                                             std::span<const double> grid_next,
                                             const PortfolioSet& ps, double h,
                                             double infusion_next) {
  if (p < 0 || p >= ps.size()) throw InputError("transition: portfolio index out of range");
  if (grid_next.empty()) throw InputError("transition: empty target grid");
  const std::size_t n = grid_next.size();
  std::vector<double> w(n, 0.0);

  auto nearest_to = [&](double target) {
    std::size_t best = 0;
    double bd = std::abs(grid_next[0] - target);
    for (std::size_t j = 1; j < n; ++j) {
      const double d = std::abs(grid_next[j] - target);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    return best;
  };

  if (w_from <= 0.0) {
    w[nearest_to(infusion_next)] = 1.0;
    return w;
  }

  // Landing wealths with positive support form a suffix of the sorted row.
  std::size_t j0 = 0;
  while (j0 < n && grid_next[j0] - infusion_next <= 0.0) ++j0;
  if (j0 == n) {
    w[nearest_to(infusion_next)] = 1.0;
    return w;
  }

  // Density times the midpoint cell width: the grid is log-spaced in the node
  // coordinate, so bare density values would converge to a size-biased limit
  // as nodes are added. The width factor makes the normalized weights a
  // consistent quadrature of the transition law. Dropping `cell` recovers the
  // bare-density variant.
  auto cell_width = [&](std::size_t j) {
    const double x = grid_next[j] - infusion_next;
    const double left = j > j0 ? grid_next[j - 1] - infusion_next : x;
    const double right = j + 1 < n ? grid_next[j + 1] - infusion_next : x;
    if (j == j0 && j + 1 == n) return 1.0;
    if (j == j0) return right - x;
    if (j + 1 == n) return x - left;
    return 0.5 * (right - left);
  };

  const double sg = ps.sigmas[p] * std::sqrt(h);
  const double m = std::log(w_from) + (ps.mus[p] - 0.5 * ps.sigmas[p] * ps.sigmas[p]) * h;
  double sum = 0.0;
  for (std::size_t j = j0; j < n; ++j) {
    const double x = grid_next[j] - infusion_next;
    const double lx = std::log(x);
    const double d = (lx - m) / sg;
    // Lognormal density up to the constant factor, which normalization kills.
    const double arg = -0.5 * d * d - lx;
    if (arg < -700.0) continue;
    const double dens = std::exp(arg) * cell_width(j);
    w[j] = dens;
    sum += dens;
  }
  if (sum <= 0.0) {
    // Every node underflowed; collapse onto the conditional mean.
    w.assign(n, 0.0);
    w[nearest_to(w_from * std::exp(ps.mus[p] * h) + infusion_next)] = 1.0;
    return w;
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace gbwm
