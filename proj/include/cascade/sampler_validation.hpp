// SPDX-License-Identifier: Apache-2.0
//
// Binned chi-squared goodness-of-fit of the branch sampler against the
// closed-form strip density of the kernel.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cascade/kernels.hpp"

namespace cascade {

/// Bins are a product of `u_bins` bands in u = |W1| (roughly equiprobable,
/// with an edge at u = |xi|) and `t_bins` bands across the strip at fixed u.
struct BinSpec {
  std::size_t u_bins = 20;
  std::size_t t_bins = 10;
  [[nodiscard]] std::size_t total() const { return u_bins * t_bins; }
};

inline constexpr double kGofPassPValue = 1e-3;
inline constexpr std::size_t kGofMinSamples = 10'000;
inline constexpr double kGofMinExpected = 5.0;

struct GoFReport {
  KernelFamily family = KernelFamily::ScaleInvariant;
  RealVec xi;
  std::size_t n = 0;
  std::size_t bins = 0;            // cells after widening
  std::size_t requested_bins = 0;
  double chi2 = 0.0;
  double dof = 0.0;
  double pvalue = 0.0;
  double expected_mass = 0.0;      // sum of cell probabilities; should be 1
  bool pass = false;
  bool underpowered = false;
  bool widened = false;
  std::vector<std::string> notes;
};

GoFReport validate_sampler(const KernelSpec& k, const Frequency& xi, std::size_t n,
                           const BinSpec& bins = {}, std::uint64_t seed = 1,
                           SamplerVariant variant = SamplerVariant::Exact);

}  // namespace cascade
