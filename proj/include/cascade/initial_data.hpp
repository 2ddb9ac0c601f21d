// SPDX-License-Identifier: Apache-2.0
//
// Radial initial data for the cascades. FNS data is g(|xi|) times a fixed
// complex unit direction; FMS data is g(|xi|) itself.
#pragma once

#include <string>

#include "cascade/freq_algebra.hpp"

namespace cascade {

enum class ProfileKind { Constant, RadialExp, Annulus, PowerCap };

/// Nonnegative radial profile g(r).
///   Constant(kappa)            kappa
///   RadialExp(kappa, a)        kappa e^{-a r}
///   Annulus(kappa, r0, r1)     kappa 1{r0 <= r <= r1}
///   PowerCap(kappa, beta, r0)  kappa min(1, (r/r0)^-beta)
class RadialProfile {
 public:
  static RadialProfile constant(double kappa);
  static RadialProfile radial_exp(double kappa, double a);
  static RadialProfile annulus(double kappa, double r0, double r1);
  static RadialProfile power_cap(double kappa, double beta, double r0);

  /// Parses "constant:k", "exp:k,a", "annulus:k,r0,r1", "powercap:k,beta,r0".
  static RadialProfile parse(const std::string& text);

  [[nodiscard]] ProfileKind kind() const { return kind_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double param(int i) const { return p_[i]; }

  double operator()(double r) const;
  /// ln g(r), -inf where g vanishes. Finite where g(r) itself underflows.
  [[nodiscard]] double log_value(double r) const;

  /// sup of g over all r.
  [[nodiscard]] double sup() const { return kappa_; }

  /// Same shape with amplitude multiplied by lambda >= 0.
  [[nodiscard]] RadialProfile scaled(double lambda) const;

  [[nodiscard]] std::string to_string() const;

 private:
  RadialProfile(ProfileKind k, double kappa, double a = 0.0, double b = 0.0);

  ProfileKind kind_ = ProfileKind::Constant;
  double kappa_ = 0.0;
  double p_[2] = {0.0, 0.0};
};

/// Default FNS direction (1, 2i, 2)/3: complex, unit, with no zero
/// component, so every coordinate of the estimator is exercised.
ComplexVec default_direction(std::size_t dim = 3);

struct InitialDataSpec {
  RadialProfile profile = RadialProfile::constant(1.0);
  ComplexVec direction = default_direction();

  InitialDataSpec() = default;
  explicit InitialDataSpec(RadialProfile g, ComplexVec dir = default_direction());

  /// chi_0(xi) = g(|xi|) direction
  [[nodiscard]] ComplexVec fns(const Frequency& xi) const;
  /// |chi_0|(xi) = g(|xi|)
  [[nodiscard]] double fms(const Frequency& xi) const { return profile(xi.norm()); }
};

}  // namespace cascade
