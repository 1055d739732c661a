#include <cmath>
#include <string>

#include "gbwm/features/features.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

static void check_portfolio(int p, const PortfolioSet& ps) {
  if (p < 0 || p >= ps.size())
    throw InputError("portfolio index " + std::to_string(p) + " out of range 0.." +
                     std::to_string(ps.size() - 1));
}

double discount_factor(double mu, double sigma, double h, double z, int tau) {
  const double t = h * static_cast<double>(tau);
  return std::exp(-(mu - 0.5 * sigma * sigma) * t - sigma * z * std::sqrt(t));
}

std::vector<double> discount_vec(std::span<const double> values, int p, double z,
                                 const PortfolioSet& ps, double h) {
  check_portfolio(p, ps);
  std::vector<double> out(values.size());
  for (std::size_t d = 0; d < values.size(); ++d)
    out[d] = values[d] * discount_factor(ps.mus[p], ps.sigmas[p], h, z, static_cast<int>(d));
  return out;
}

double discount_sum(std::span<const double> values, int p, double z,
                    const PortfolioSet& ps, double h) {
  check_portfolio(p, ps);
  double s = 0.0;
  for (std::size_t d = 0; d < values.size(); ++d)
    s += values[d] * discount_factor(ps.mus[p], ps.sigmas[p], h, z, static_cast<int>(d));
  return s;
}

double expected_cum_inflation(const VasicekParams& v, double i_curr, double tau_years) {
  if (!(v.kappa > 0.0)) throw InputError("inflation.kappa: must be > 0");
  if (tau_years <= 0.0) return 1.0;
  const double k = v.kappa;
  const double a = (1.0 - std::exp(-k * tau_years)) / k;
  const double b = (v.theta - v.sigma * v.sigma / (2.0 * k * k)) * (a - tau_years) -
                   (v.sigma * v.sigma / (4.0 * k)) * a * a;
  return std::exp(i_curr * a - b);
}

std::vector<double> discount_vec_infl(std::span<const double> values, int p, double z,
                                      const PortfolioSet& ps, double h, double i_curr,
                                      const VasicekParams& v) {
  std::vector<double> out = discount_vec(values, p, z, ps, h);
  for (std::size_t d = 0; d < out.size(); ++d)
    out[d] *= expected_cum_inflation(v, i_curr, h * static_cast<double>(d));
  return out;
}

}  // namespace gbwm
