#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cmrf {

/// Deterministic random stream. All draws are derived from the mt19937_64
/// output sequence with fixed arithmetic, so a seed pins every bit of a run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// Standard normal via Box-Muller; draws are produced in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Centered Cauchy draw by quantile inversion: scale * tan(pi (U - 1/2)).
  double cauchy(double scale) {
    return scale * std::tan(M_PI * (uniform() - 0.5));
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cmrf
