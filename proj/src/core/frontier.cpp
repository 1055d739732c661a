#include <cmath>

#include "gbwm/core/types.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

double EfficientFrontierSpec::sigma_at(double mu) const {
  const std::size_t n = anchor_mus.size();
  if (n == 0 || anchor_sigmas.size() != n)
    throw InputError("frontier '" + name + "': anchors missing or mismatched");
  if (mu <= anchor_mus.front()) return anchor_sigmas.front();
  if (mu >= anchor_mus.back()) return anchor_sigmas.back();
  for (std::size_t k = 1; k < n; ++k) {
    if (mu <= anchor_mus[k]) {
      const double lo = anchor_mus[k - 1], hi = anchor_mus[k];
      const double w = hi > lo ? (mu - lo) / (hi - lo) : 0.0;
      return anchor_sigmas[k - 1] + w * (anchor_sigmas[k] - anchor_sigmas[k - 1]);
    }
  }
  return anchor_sigmas.back();
}

PortfolioSet discretize_frontier(const EfficientFrontierSpec& spec) {
  const std::size_t n = spec.anchor_mus.size();
  if (n < 2 || spec.anchor_sigmas.size() != n)
    throw InputError("frontier '" + spec.name + "': need at least 2 anchor points");
  for (std::size_t k = 1; k < n; ++k)
    if (!(spec.anchor_mus[k] > spec.anchor_mus[k - 1]))
      throw InputError("frontier '" + spec.name + "': anchor returns must strictly increase");
  for (double s : spec.anchor_sigmas)
    if (!(s > 0.0) || !std::isfinite(s))
      throw InputError("frontier '" + spec.name + "': anchor volatilities must be positive");
  if (spec.count < 2)
    throw InputError("frontier '" + spec.name + "': portfolio count must be at least 2");

  const double mu_lo = spec.anchor_mus.front();
  const double mu_hi = spec.anchor_mus.back();
  PortfolioSet ps;
  ps.mus.reserve(spec.count);
  ps.sigmas.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const double mu = mu_lo + (mu_hi - mu_lo) * static_cast<double>(i) / (spec.count - 1);
    ps.mus.push_back(mu);
    ps.sigmas.push_back(spec.sigma_at(mu));
  }
  return ps;
}

}  // namespace gbwm
