#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dspopt {

// One splitmix64 step. Used to derive decorrelated substream seeds from a
// user-facing seed; the (seed, stream) -> seed mapping is part of the
// reproducibility contract, so keep it stable.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random source. The core is std::mt19937_64, whose output
// sequence is pinned by the standard; all variate generation is done by hand
// on top of uniform01() so that results are identical across standard-library
// implementations (std::*_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform draw on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Sum of `n` Bernoulli(p) trials; consumes exactly n draws.
  int binomial(int n, double p) {
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (uniform01() < p) ++count;
    }
    return count;
  }

  /// Poisson variate. Product method below mean 10, Hormann's transformed
  /// rejection (PTRS) above; both consume a data-dependent number of draws.
  long long poisson(double mean) {
    if (!(mean >= 0.0)) return 0;
    if (mean < 10.0) return poisson_small(mean);
    return poisson_ptrs(mean);
  }

 private:
  long long poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }

  long long poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform01() - 0.5;
      double v = uniform01();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          -mean + k * loglam - std::lgamma(k + 1.0)) {
        return static_cast<long long>(k);
      }
    }
  }

  std::mt19937_64 gen_;
};

}  // namespace dspopt
