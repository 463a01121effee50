#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pfmr {

/// Deterministic random source. Draws are generated directly from the
/// mt19937_64 stream (not through std distributions, whose output is
/// implementation-defined), so identical seeds give identical samples
/// on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = gen_(); } while (x >= limit);
    return x % n;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Binomial(n, p) as a sum of Bernoulli draws.
  int binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += uniform() < p ? 1 : 0;
    return k;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pfmr
