#pragma once

#include <cstdint>
#include <string_view>

// Deterministic random numbers. We deliberately avoid <random>'s engines and
// distributions for anything that ends up in results: the standard pins
// mt19937's stream but not normal_distribution's algorithm, so outputs would
// differ across standard libraries. Everything here is fully specified.

namespace gbwm {

// Inverse standard normal CDF, Wichura's AS241 (double precision variant).
// Max absolute error around 1e-15 in the open interval (0, 1).
double normal_inv_cdf(double p);

// SplitMix64-style finalizer, used for seeding and for hashing key material.
std::uint64_t mix64(std::uint64_t x);

// Derive an independent stream seed from a base seed and a purpose tag.
// Same (seed, tag) always gives the same result; different tags decorrelate.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a,
                          std::uint64_t b);

// xoshiro256** 1.0 (Blackman & Vigna), seeded through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1): 53 random bits scaled by 2^-53.
  double uniform01();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via inverse CDF of a uniform. One draw per call, so the
  // stream is insensitive to call patterns (no Box-Muller caching).
  double normal();

  // Uniform integer in [0, n), n >= 1, by rejection (unbiased).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

// Purpose-keyed shock streams for one simulation unit (an episode or a Monte
// Carlo path). Market shocks, inflation shocks, exploration noise and
// auxiliary draws come from independent substreams so that, e.g., turning
// inflation on or off does not shift the market shock sequence.
class ShockSource {
 public:
  ShockSource(std::uint64_t seed, std::uint64_t unit);

  double gbm();          // market return shock, N(0,1)
  double inflation();    // rate process shock, N(0,1)
  double exploration();  // policy exploration shock, N(0,1)
  double uniform01();    // auxiliary uniform draw

 private:
  Rng gbm_, inflation_, exploration_, aux_;
};

}  // namespace gbwm
