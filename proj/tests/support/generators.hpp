#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "exptower/analytic.hpp"
#include "exptower/target_set.hpp"

namespace exptower::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// Uniform in the closed disk |z - c| <= r.
  Complex in_disk(double r, Complex c = {}) {
    const double rho = r * std::sqrt(uniform(0.0, 1.0));
    return c + std::polar(rho, uniform(-kPi, kPi));
  }

  Complex in_annulus(double r0, double r1) { return std::polar(uniform(r0, r1), uniform(-kPi, kPi)); }

  /// Modulus log-uniform in [lo, hi], argument uniform.
  Complex with_modulus(double lo, double hi) {
    return std::polar(std::exp(uniform(std::log(lo), std::log(hi))), uniform(-kPi, kPi));
  }

  std::vector<Complex> lambdas(std::size_t n, double lo = 0.2, double hi = 5.0) {
    std::vector<Complex> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(with_modulus(lo, hi));
    return out;
  }

  /// {0} together with `extra` random points of modulus in [0.2, 3].
  TargetSetSpec point_target(std::size_t extra) {
    TargetSetSpec spec;
    spec.primitives.push_back(PointPrimitive{{0.0, 0.0}});
    for (std::size_t i = 0; i < extra; ++i) spec.primitives.push_back(PointPrimitive{with_modulus(0.2, 3.0)});
    return spec;
  }

  /// The origin plus one random segment, disk or rectangle away from it.
  TargetSetSpec mixed_target() {
    TargetSetSpec spec;
    spec.primitives.push_back(PointPrimitive{{0.0, 0.0}});
    const Complex c = with_modulus(0.5, 2.0);
    switch (integer(0, 2)) {
      case 0:
        spec.primitives.push_back(SegmentPrimitive{c, c + with_modulus(0.1, 1.0)});
        break;
      case 1:
        spec.primitives.push_back(DiskPrimitive{c, uniform(0.05, 0.3)});
        break;
      default:
        spec.primitives.push_back(RectanglePrimitive{c, c + Complex(uniform(0.1, 0.5), uniform(0.1, 0.5))});
        break;
    }
    return spec;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Runs `body(gen)` for `cases` generated cases with a fixed seed per property.
template <class Body>
void for_all(std::uint64_t seed, int cases, Body&& body) {
  Gen gen(seed);
  for (int i = 0; i < cases; ++i) body(gen, i);
}

inline double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace exptower::testing
