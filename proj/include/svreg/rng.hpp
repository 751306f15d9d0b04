#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace svreg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with named substreams. All variate transforms live here
// (inverse CDF / Box-Muller on top of mt19937_64) so that a fixed seed gives
// the same stream on every platform and build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x9e3779b97f4a7c15ULL));
  }

  // Independent substream; derived from the construction seed, not the
  // current engine state, so substream layouts are order-insensitive.
  Rng sub(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }
  Rng sub(std::uint64_t tag1, std::uint64_t tag2) const {
    return Rng(mix(mix(seed_, tag1), tag2));
  }

  std::uint64_t next() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // (0, 1)
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform_open();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double laplace(double b) {
    double u = uniform_open() - 0.5;
    double s = u < 0 ? -1.0 : 1.0;
    return -b * s * std::log1p(-2.0 * std::abs(u));
  }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  // Beta(a, b) via gamma ratio (Marsaglia-Tsang for shape >= 1, boost for <1).
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0) continue;
      v = v * v * v;
      double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace svreg
