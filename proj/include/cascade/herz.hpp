// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous Herz norms of radial functions,
//   || { || |xi|^alpha f ||_{L^p(A_k)} }_k ||_{l^q},  A_k = {2^k <= |xi| <= 2^{k+1}},
// plus the normalization chi_0 = c_0 v_0 / h and the smallness threshold.
#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cascade/initial_data.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A nonnegative radial function with its known discontinuities and kinks.
struct RadialFunction {
  std::function<double(double)> eval;
  std::vector<double> breakpoints;
  std::string label;

  double operator()(double r) const { return eval(r); }

  static RadialFunction from_profile(const RadialProfile& g);
  /// kappa r^exponent on (0, inf).
  static RadialFunction power(double kappa, double exponent);
};

struct HerzParams {
  double alpha = -1.0;
  double p = 1.0;  // in [1, inf]
  double q = 1.0;  // in [1, inf]
  std::size_t dim = 3;
  int k_min = -40;
  int k_max = 40;

  /// alpha = d - 1 - d/p.
  static HerzParams scale_critical(double p, double q, std::size_t dim = 3);
  void validate() const;
};

struct ShellValue {
  int k = 0;
  double value = 0.0;  // || |xi|^alpha f ||_{L^p(A_k)}
};

struct HerzReport {
  HerzParams params;
  std::vector<ShellValue> shells;
  double norm = 0.0;        // l^q over [k_min, k_max]; +inf when divergent
  double tail_bound = 0.0;  // geometric estimate of the shells outside the range
  bool divergent = false;
  std::vector<int> divergent_shells;  // shells whose growth rules out a finite norm
};

/// Surface area of the unit sphere in R^d.
double sphere_area(std::size_t dim);

/// Value of one shell.
double herz_shell(const RadialFunction& f, const HerzParams& prm, int k);

HerzReport herz_norm(const RadialFunction& f, const HerzParams& prm);
inline HerzReport herz_norm(const RadialProfile& g, const HerzParams& prm) {
  return herz_norm(RadialFunction::from_profile(g), prm);
}

/// chi_0(r) = c_0 v_0(r) / h(r) with c_0 = (2 pi)^{-d/2}.
RadialFunction normalize_data(const RadialProfile& v0, const KernelSpec& kernel);

/// epsilon = delta^{1/p} (c_d / c_0)^{1 - 1/p} for the scale-invariant kernel.
double smallness_threshold(double p, std::size_t dim, double delta);

inline constexpr double kDefaultSmallnessDelta = 0.01;

struct NormIdentityCheck {
  double p = 1.0;
  double lhs = 0.0;  // K^{-1}_{1,1} norm of h phi_0 / c_0, phi_0 = |chi_0|^p
  double rhs = 0.0;  // (c_0/c_d)^{p-1} ||v_0||^p in K^alpha_{p,p}, alpha critical
  double rel_error = 0.0;
};

/// Both sides of the norm identity for the scale-invariant kernel, computed
/// from separate integrands over the same shells.
NormIdentityCheck norm_identity(const RadialProfile& v0, double p, std::size_t dim = 3);

}  // namespace cascade
