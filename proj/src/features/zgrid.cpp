#include "gbwm/features/features.hpp"
#include "gbwm/util/errors.hpp"
#include "gbwm/util/rng.hpp"

namespace gbwm {

std::vector<double> z_midpoints(int n) {
  if (n < 1) throw InputError("z_midpoints: n must be at least 1");
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i)
    z[i] = normal_inv_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return z;
}

}  // namespace gbwm
