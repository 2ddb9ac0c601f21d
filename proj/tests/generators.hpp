// SPDX-License-Identifier: Apache-2.0
//
// Small random generators for the property tests. Each test owns a Gen
// seeded with a fixed value so failures replay exactly.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "cascade/freq_algebra.hpp"
#include "cascade/initial_data.hpp"

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  /// Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  cascade::RealVec real_vec(std::size_t d, double scale = 1.0) {
    cascade::RealVec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = scale * normal();
    return v;
  }

  /// Nonzero frequency with log-uniform magnitude and uniform direction.
  cascade::Frequency frequency(std::size_t d = 3, double r_lo = 1e-3, double r_hi = 1e3) {
    cascade::RealVec v = real_vec(d);
    while (v.norm() < 1e-8) v = real_vec(d);
    v *= log_uniform(r_lo, r_hi) / v.norm();
    return cascade::Frequency(v);
  }

  cascade::ComplexVec complex_vec(std::size_t d, double scale = 1.0) {
    cascade::ComplexVec a(d);
    for (std::size_t i = 0; i < d; ++i) a[i] = scale * std::complex<double>(normal(), normal());
    return a;
  }

  /// One of the built-in radial profiles with random parameters.
  cascade::RadialProfile profile(double kappa_max = 1.0) {
    const double k = uniform(0.05, kappa_max);
    switch (integer(0, 3)) {
      case 0:
        return cascade::RadialProfile::constant(k);
      case 1:
        return cascade::RadialProfile::radial_exp(k, uniform(0.1, 3.0));
      case 2: {
        const double r0 = log_uniform(0.05, 4.0);
        return cascade::RadialProfile::annulus(k, r0, r0 * uniform(1.2, 6.0));
      }
      default:
        return cascade::RadialProfile::power_cap(k, uniform(0.2, 3.0), log_uniform(0.05, 4.0));
    }
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::mt19937_64 eng_;
};

}  // namespace gen
