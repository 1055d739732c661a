#include <algorithm>
#include <cmath>

#include "gbwm/eval/eval.hpp"
#include "gbwm/util/errors.hpp"
#include "gbwm/util/parallel.hpp"
#include "gbwm/util/rng.hpp"

namespace gbwm {

namespace {

struct SolvedCase {
  Scenario scenario;
  WealthGrid grid;
  DPSolution solution;
};

SolvedCase solve_scaled(const Scenario& base, const PortfolioSet& ps, double scale,
                        int nodes_per_step) {
  SolvedCase sc;
  sc.scenario = base;
  sc.scenario.portfolios = ps;
  sc.scenario.W0 = base.W0 * scale;
  sc.grid = build_wealth_grid(sc.scenario, nodes_per_step);
  sc.solution = backward_pass(sc.scenario, sc.grid);
  return sc;
}

double solved_value(const SolvedCase& sc) {
  return sc.solution.value[0][nearest_node(sc.grid.nodes[0], sc.scenario.W0)];
}

}  // namespace

std::vector<FrontierStudyRow> frontier_robustness_study(
    const PolicyEnsemble& ens, const std::vector<EfficientFrontierSpec>& frontiers,
    const std::vector<Scenario>& cases, const FrontierStudySettings& st) {
  if (frontiers.empty()) throw InputError("frontier study: empty frontier set");
  if (cases.empty()) throw InputError("frontier study: empty case set");
  if (st.n_paths < 1) throw InputError("frontier study: n_paths must be >= 1");
  if (st.nodes_per_step < 2) throw InputError("frontier study: nodes_per_step must be >= 2");
  if (!(st.band_lo < st.band_hi)) throw InputError("frontier study: empty fundedness band");

  const std::size_t n = cases.size();
  std::vector<double> total_utils(n);
  for (std::size_t i = 0; i < n; ++i) total_utils[i] = cases[i].total_utility();

  std::vector<FrontierStudyRow> rows;
  for (std::size_t fi = 0; fi < frontiers.size(); ++fi) {
    const PortfolioSet ps = discretize_frontier(frontiers[fi]);
    const std::uint64_t froot = derive_seed(st.seed, "frontier", fi);

    // Coarse search: solve every case once at the unscaled wealth, then read
    // value(0, s*W0) off those solutions while bisecting the scale in log
    // space. The fundedness mean rises with the scale, so bisection is valid.
    std::vector<SolvedCase> base(n);
    parallel_for(0, n, [&](std::size_t i) {
      base[i] = solve_scaled(cases[i], ps, 1.0, st.nodes_per_step);
    });
    const auto coarse_fundedness = [&](double scale) {
      double acc = 0.0;
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (total_utils[i] <= 0.0) continue;
        acc += bellman_value_at(base[i].solution, base[i].scenario, 0,
                                scale * cases[i].W0) /
               total_utils[i];
        ++cnt;
      }
      if (cnt == 0) throw InputError("frontier study: no case has positive total utility");
      return acc / cnt;
    };

    const auto coarse_invert = [&](double target) {
      double lo = std::pow(2.0, -10), hi = std::pow(2.0, 10);
      if (coarse_fundedness(lo) > target || coarse_fundedness(hi) < target)
        throw NumericError(
            "frontier study: cannot bracket the fundedness band for frontier '" +
            frontiers[fi].name + "'");
      for (int it = 0; it < 64; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (coarse_fundedness(mid) < target)
          lo = mid;
        else
          hi = mid;
      }
      return std::sqrt(lo * hi);
    };

    // Exact pass: re-solve every case with the scaled initial wealth on its
    // own grid. The coarse reads carry an extrapolation bias (they reuse the
    // unscaled grids), so the coarse inverse only seeds a bisection on the
    // re-solved curve; that curve is smooth in the scale up to sub-band grid
    // wiggle, so the bracket walk below lands inside the band.
    std::vector<SolvedCase> scaled(n);
    const auto resolve_fundedness = [&](double s_try) {
      parallel_for(0, n, [&](std::size_t i) {
        scaled[i] = solve_scaled(cases[i], ps, s_try, st.nodes_per_step);
      });
      double acc = 0.0;
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (total_utils[i] <= 0.0) continue;
        acc += solved_value(scaled[i]) / total_utils[i];
        ++cnt;
      }
      return acc / cnt;
    };

    const double mid_band = 0.5 * (st.band_lo + st.band_hi);
    const double kScaleLo = std::pow(2.0, -10), kScaleHi = std::pow(2.0, 10);
    double scale = coarse_invert(mid_band);
    double fund = resolve_fundedness(scale);
    if (fund < st.band_lo || fund > st.band_hi) {
      double slo = scale, shi = scale;
      if (fund < st.band_lo) {
        do {
          if (fund < st.band_lo) slo = scale;  // last scale known to sit below
          shi = std::min(shi * 1.6, kScaleHi);
          scale = shi;
          fund = resolve_fundedness(scale);
        } while (fund < st.band_lo && shi < kScaleHi);
        if (fund < st.band_lo)
          throw NumericError(
              "frontier study: cannot bracket the fundedness band for frontier '" +
              frontiers[fi].name + "'");
      } else {
        do {
          if (fund > st.band_hi) shi = scale;
          slo = std::max(slo / 1.6, kScaleLo);
          scale = slo;
          fund = resolve_fundedness(scale);
        } while (fund > st.band_hi && slo > kScaleLo);
        if (fund > st.band_hi)
          throw NumericError(
              "frontier study: cannot bracket the fundedness band for frontier '" +
              frontiers[fi].name + "'");
      }
      for (int it = 0; it < 36 && (fund < st.band_lo || fund > st.band_hi); ++it) {
        if (fund < st.band_lo)
          slo = scale;
        else
          shi = scale;
        scale = std::sqrt(slo * shi);
        fund = resolve_fundedness(scale);
      }
      if (fund < st.band_lo || fund > st.band_hi)
        throw NumericError("frontier study: bisection did not settle inside the band for '" +
                           frontiers[fi].name + "'");
    }

    FrontierStudyRow row;
    row.frontier = frontiers[fi].name;
    row.wealth_scale = scale;
    row.fundedness = fund;
    std::vector<std::optional<double>> effs(n);
    parallel_for(0, n, [&](std::size_t i) {
      const std::uint64_t panel = derive_seed(froot, "panel", i);
      const EfficiencyResult er = rl_efficiency(scaled[i].scenario, ens,
                                                scaled[i].solution, st.n_paths, panel);
      effs[i] = er.efficiency;
    });
    double acc = 0.0;
    int cnt = 0;
    for (const auto& e : effs)
      if (e) {
        acc += *e;
        ++cnt;
      }
    row.cases_counted = cnt;
    row.mean_efficiency = cnt > 0 ? acc / cnt : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

InflationStudy inflation_study(const PolicyEnsemble& ens, std::span<const double> thetas,
                               std::span<const double> kappas, std::span<const double> sigmas,
                               const std::vector<Scenario>& cases, int n_paths,
                               std::uint64_t seed) {
  if (!ens.inflation_aware())
    throw InputError("inflation_study: needs an inflation-aware (wider-input) ensemble");
  if (thetas.empty() || kappas.empty() || sigmas.empty())
    throw InputError("inflation_study: empty parameter grid");
  if (cases.empty()) throw InputError("inflation_study: empty case set");
  if (n_paths < 1) throw InputError("inflation_study: n_paths must be >= 1");
  for (double k : kappas)
    if (k <= 0.0) throw InputError("inflation_study: kappa values must be > 0");

  const std::size_t n = cases.size();
  std::vector<std::uint64_t> panels(n);
  for (std::size_t i = 0; i < n; ++i) panels[i] = derive_seed(seed, "panel", i);

  const auto grid_mean = [&](const VasicekParams& v) {
    std::vector<double> means(n);
    parallel_for(0, n, [&](std::size_t i) {
      Scenario sc = cases[i];
      sc.inflation = v;
      means[i] = mc_evaluate(ens, sc, n_paths, panels[i]).mean;
    });
    double acc = 0.0;
    for (double m : means) acc += m;
    return acc / static_cast<double>(n);
  };

  InflationStudy study;
  // Reference: the rate is pinned at zero (theta = sigma = i0 = 0), which
  // kappa cannot move, so any positive kappa gives the same trajectories.
  study.base_mean = grid_mean(VasicekParams{1.0, 0.0, 0.0, 0.0});

  for (double th : thetas)
    for (double ka : kappas)
      for (double sg : sigmas) {
        InflationCell cell;
        cell.theta = th;
        cell.kappa = ka;
        cell.sigma = sg;
        cell.mean_utility = grid_mean(VasicekParams{ka, th, sg, th});
        cell.ratio = study.base_mean != 0.0 ? cell.mean_utility / study.base_mean : 0.0;
        study.cells.push_back(cell);
      }
  return study;
}

TextTable InflationStudy::to_table() const {
  TextTable t;
  t.columns = {"theta", "kappa", "sigma", "mean_utility", "ratio"};
  for (const InflationCell& c : cells)
    t.rows.push_back({c.theta, c.kappa, c.sigma, c.mean_utility, c.ratio});
  return t;
}

}  // namespace gbwm
