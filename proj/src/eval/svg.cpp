#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "gbwm/eval/eval.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

std::string f2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fg(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string xml_escape(const std::string& in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Rgb {
  int r, g, b;
};

std::string lerp_color(Rgb a, Rgb b, double f) {
  f = std::clamp(f, 0.0, 1.0);
  const auto mix = [f](int x, int y) {
    return static_cast<int>(std::lround(x + f * (y - x)));
  };
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(a.r, b.r), mix(a.g, b.g),
                mix(a.b, b.b));
  return buf;
}

constexpr Rgb kPortfolioLo{0xde, 0xeb, 0xf7};
constexpr Rgb kPortfolioHi{0x08, 0x30, 0x6b};
constexpr Rgb kGoalLo{0xff, 0xff, 0xff};
constexpr Rgb kGoalHi{0x67, 0x00, 0x0d};

}  // namespace

std::string heatmap_svg(const DecisionTables& tables, const Scenario& s,
                        const std::string& what, const std::string& title) {
  const bool portfolio_mode = what == "portfolio";
  if (!portfolio_mode && what != "goal")
    throw InputError("heatmap_svg: unknown layer '" + what +
                     "' (expected \"portfolio\" or \"goal\")");
  const auto& rows = tables.grid.nodes;
  if (rows.empty()) throw InputError("heatmap_svg: empty grid");
  const int T = static_cast<int>(rows.size()) - 1;

  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (const auto& row : rows) {
    for (double w : row)
      if (w > 0.0) wmin = std::min(wmin, w);
    if (!row.empty()) wmax = std::max(wmax, row.back());
  }
  if (!(wmax > 0.0)) throw InputError("heatmap_svg: grid has no positive wealth");
  if (!(wmin < wmax)) wmin = wmax / 10.0;
  const double lw0 = std::log(wmin), lw1 = std::log(wmax);

  const double ml = 70.0, mr = 24.0, mt = 56.0, mb = 46.0;
  const double plot_w = std::max(600.0, 8.0 * (T + 1));
  const double plot_h = 420.0;
  const double width = ml + plot_w + mr, height = mt + plot_h + mb;
  const double colw = plot_w / (T + 1);
  const double ytop = mt, ybot = mt + plot_h;

  const auto ypix = [&](double w) {
    if (!(w > wmin)) return ybot;
    if (w >= wmax) return ytop;
    return ybot - (std::log(w) - lw0) / (lw1 - lw0) * plot_h;
  };
  const auto xleft = [&](int t) { return ml + t * colw; };

  std::string svg;
  svg.reserve(1 << 16);
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(width) +
         "\" height=\"" + f2(height) + "\" viewBox=\"0 0 " + f2(width) + " " +
         f2(height) + "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  const std::string ramp_lo = portfolio_mode ? lerp_color(kPortfolioLo, kPortfolioHi, 0.0)
                                             : lerp_color(kGoalLo, kGoalHi, 0.0);
  const std::string ramp_hi = portfolio_mode ? lerp_color(kPortfolioLo, kPortfolioHi, 1.0)
                                             : lerp_color(kGoalLo, kGoalHi, 1.0);
  svg += "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"0\">";
  svg += "<stop offset=\"0\" stop-color=\"" + ramp_lo + "\"/>";
  svg += "<stop offset=\"1\" stop-color=\"" + ramp_hi + "\"/></linearGradient></defs>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + f2(width) + "\" height=\"" + f2(height) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + f2(ml) + "\" y=\"24\" font-size=\"16\" fill=\"#222\">" +
         xml_escape(title) + "</text>\n";

  // color cells, run-length merged down each column
  const int P = std::max(s.portfolios.size(), 1);
  for (int t = 0; t <= T; ++t) {
    const auto& row = rows[t];
    const std::size_t m = row.size();
    const double x = xleft(t);
    const GoalSet* gs = s.goal_at(t);
    if (!portfolio_mode && (gs == nullptr || gs->trivial())) {
      svg += "<rect x=\"" + f2(x) + "\" y=\"" + f2(ytop) + "\" width=\"" + f2(colw) +
             "\" height=\"" + f2(plot_h) + "\" fill=\"#fafafa\"/>\n";
      continue;
    }
    if (m == 0) continue;
    std::vector<double> ys(m), edge(m + 1);
    for (std::size_t i = 0; i < m; ++i) ys[i] = ypix(row[i]);
    edge[0] = ybot;
    for (std::size_t i = 1; i < m; ++i) edge[i] = 0.5 * (ys[i - 1] + ys[i]);
    edge[m] = ytop;
    const auto cell_color = [&](std::size_t i) {
      if (portfolio_mode) {
        const int p = (t < static_cast<int>(tables.portfolio.size()) &&
                       i < tables.portfolio[t].size())
                          ? tables.portfolio[t][i]
                          : 0;
        return lerp_color(kPortfolioLo, kPortfolioHi,
                          P > 1 ? static_cast<double>(p) / (P - 1) : 0.0);
      }
      const int k = (t < static_cast<int>(tables.goal_choice.size()) &&
                     i < tables.goal_choice[t].size())
                        ? tables.goal_choice[t][i]
                        : 0;
      const double full = gs->full_utility();
      const double frac =
          (full > 0.0 && k >= 0 && k < static_cast<int>(gs->front.size()))
              ? gs->front[k].utility / full
              : 0.0;
      return lerp_color(kGoalLo, kGoalHi, frac);
    };
    std::size_t i = 0;
    while (i < m) {
      std::size_t j = i;
      const std::string fill = cell_color(i);
      while (j + 1 < m && cell_color(j + 1) == fill) ++j;
      svg += "<rect x=\"" + f2(x) + "\" y=\"" + f2(edge[j + 1]) + "\" width=\"" +
             f2(colw) + "\" height=\"" + f2(edge[i] - edge[j + 1]) + "\" fill=\"" +
             fill + "\"/>\n";
      i = j + 1;
    }
  }

  // cost to fulfil all remaining goals, as a step line clamped to the axis
  {
    std::vector<double> rem(T + 2, 0.0);
    for (int t = T; t >= 0; --t) {
      const GoalSet* gs = s.goal_at(t);
      rem[t] = rem[t + 1] + (gs != nullptr ? gs->full_cost() : 0.0);
    }
    std::string d;
    for (int t = 0; t <= T && rem[t] > 0.0; ++t) {
      const double y = std::clamp(ypix(rem[t]), ytop, ybot);
      if (d.empty())
        d = "M " + f2(xleft(t)) + " " + f2(y);
      else
        d += " L " + f2(xleft(t)) + " " + f2(y);
      d += " L " + f2(xleft(t) + colw) + " " + f2(y);
    }
    if (!d.empty())
      svg += "<path d=\"" + d +
             "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.8\"/>\n";
  }

  // cumulative infusions, dashed, from the first step where the total is positive
  {
    std::string d;
    double cum = 0.0;
    for (int t = 0; t <= T; ++t) {
      cum += s.infusion_at(t);
      if (cum <= 0.0) continue;
      const double y = std::clamp(ypix(cum), ytop, ybot);
      if (d.empty())
        d = "M " + f2(xleft(t)) + " " + f2(y);
      else
        d += " L " + f2(xleft(t)) + " " + f2(y);
      d += " L " + f2(xleft(t) + colw) + " " + f2(y);
    }
    if (!d.empty())
      svg += "<path d=\"" + d +
             "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.6\" "
             "stroke-dasharray=\"6 4\"/>\n";
  }

  // initial wealth marker on the first column
  {
    const double y = std::clamp(ypix(s.W0), ytop, ybot);
    svg += "<line x1=\"" + f2(xleft(0)) + "\" y1=\"" + f2(y) + "\" x2=\"" +
           f2(xleft(0) + colw) + "\" y2=\"" + f2(y) +
           "\" stroke=\"#ff7f0e\" stroke-width=\"2.5\"/>\n";
  }

  // frame and axis ticks
  svg += "<rect x=\"" + f2(ml) + "\" y=\"" + f2(ytop) + "\" width=\"" + f2(plot_w) +
         "\" height=\"" + f2(plot_h) +
         "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  const int xstep = std::max(1, (T + 1) / 10);
  for (int t = 0; t <= T; t += xstep) {
    const double x = xleft(t) + 0.5 * colw;
    svg += "<line x1=\"" + f2(x) + "\" y1=\"" + f2(ybot) + "\" x2=\"" + f2(x) +
           "\" y2=\"" + f2(ybot + 5) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + f2(x) + "\" y=\"" + f2(ybot + 18) +
           "\" font-size=\"11\" fill=\"#222\" text-anchor=\"middle\">" +
           std::to_string(t) + "</text>\n";
  }
  svg += "<text x=\"" + f2(ml + 0.5 * plot_w) + "\" y=\"" + f2(ybot + 36) +
         "\" font-size=\"12\" fill=\"#222\" text-anchor=\"middle\">time step</text>\n";
  int n_yticks = 0;
  for (int e = static_cast<int>(std::ceil(std::log10(wmin)));
       e <= static_cast<int>(std::floor(std::log10(wmax))); ++e) {
    const double w = std::pow(10.0, e);
    const double y = ypix(w);
    svg += "<line x1=\"" + f2(ml - 5) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(ml) +
           "\" y2=\"" + f2(y) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + f2(ml - 8) + "\" y=\"" + f2(y + 4) +
           "\" font-size=\"11\" fill=\"#222\" text-anchor=\"end\">" + fg(w) +
           "</text>\n";
    ++n_yticks;
  }
  if (n_yticks < 2) {
    for (double w : {wmin, wmax}) {
      const double y = ypix(w);
      svg += "<text x=\"" + f2(ml - 8) + "\" y=\"" + f2(y + 4) +
             "\" font-size=\"11\" fill=\"#222\" text-anchor=\"end\">" + fg(w) +
             "</text>\n";
    }
  }
  svg += "<text x=\"" + f2(ml) + "\" y=\"" + f2(ytop - 8) +
         "\" font-size=\"12\" fill=\"#222\">wealth</text>\n";

  // gradient legend, top right
  {
    const double lx = ml + plot_w - 150.0, ly = 30.0;
    svg += "<rect x=\"" + f2(lx) + "\" y=\"" + f2(ly) +
           "\" width=\"120\" height=\"12\" fill=\"url(#ramp)\" stroke=\"#999\" "
           "stroke-width=\"0.5\"/>\n";
    const std::string lo_label = "0";
    const std::string hi_label =
        portfolio_mode ? std::to_string(P - 1) : std::string("full");
    const std::string name = portfolio_mode ? "portfolio" : "goal taken";
    svg += "<text x=\"" + f2(lx - 6) + "\" y=\"" + f2(ly + 10) +
           "\" font-size=\"10\" fill=\"#222\" text-anchor=\"end\">" + lo_label +
           "</text>\n";
    svg += "<text x=\"" + f2(lx + 126) + "\" y=\"" + f2(ly + 10) +
           "\" font-size=\"10\" fill=\"#222\">" + hi_label + "</text>\n";
    svg += "<text x=\"" + f2(lx + 60) + "\" y=\"" + f2(ly - 4) +
           "\" font-size=\"10\" fill=\"#222\" text-anchor=\"middle\">" + name +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gbwm
