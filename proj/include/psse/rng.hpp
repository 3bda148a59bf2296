#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "psse/types.hpp"

namespace psse {

// Deterministic random source. Draws are produced by explicit algorithms on
// top of mt19937_64 so that a given seed yields the same sequence on every
// run and platform (the standard-library distributions do not guarantee
// that). Every draw consumes a fixed number of engine outputs: uniform()
// takes one, standard_normal() takes two.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [lo, hi); returns lo when hi == lo.
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller, cosine branch only.
  double standard_normal() {
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }

  // Circularly-symmetric complex standard normal (unit variance per entry).
  Complex complex_normal() {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    double re = standard_normal();
    double im = standard_normal();
    return Complex(re * inv_sqrt2, im * inv_sqrt2);
  }

 private:
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

}  // namespace psse
