// SPDX-License-Identifier: Apache-2.0
//
// Majorizing kernels h with h*h = |xi| h, the branching density
// H(eta|xi) = h(eta) h(xi-eta) / (|xi| h(xi)), and exact samplers for the
// child frequency in d = 3.
//
// Samplers work in the coordinates u = |eta|, w = |xi - eta| on the strip
// {u > 0, |u - r| <= w <= u + r}, r = |xi|, where
//   d eta = (2 pi u w / r) du dw  x  (uniform azimuth / 2 pi).
#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cascade/freq_algebra.hpp"

namespace cascade {

enum class KernelFamily { ScaleInvariant, Bessel };

std::string to_string(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& s);

/// Inverse-CDF machinery for the scale-invariant radial ratio s = |eta|/|xi|,
/// whose law has density (2/pi^2) s^-1 ln((1+s)/|1-s|) on (0, inf).
///
/// The law is invariant under s -> 1/s, so only the half on (0, 1] is
/// tabulated; there F(s) = (4/pi^2) chi_2(s) with Legendre's chi function.
class ScaleInvariantRatioLaw {
 public:
  static constexpr std::size_t kKnots = 4096;

  ScaleInvariantRatioLaw();

  static double density(double s);
  static double cdf(double s);

  /// Quantile of the law at probability p in (0, 1).
  [[nodiscard]] double quantile(double p) const;

 private:
  // Inverse of the lower half: x in (0, 1] with G(x) = p, p in (0, 1/2].
  [[nodiscard]] double lower_half_quantile(double p) const;

  std::vector<double> x_;  // log-spaced knots in (0, 1]
  std::vector<double> g_;  // G at the knots, strictly increasing
};

/// Legendre chi function chi_2(x) = sum_k x^(2k+1)/(2k+1)^2 on [0, 1].
double legendre_chi2(double x);

/// Majorizing kernel family, dimension, and normalization constant of h.
/// Immutable after construction; safe to share across sampling threads.
class KernelSpec {
 public:
  /// h(xi) = c_d |xi|^(1-d). c_3 = pi^-3.
  static KernelSpec scale_invariant(std::size_t dim = 3);
  /// h(xi) = e^-|xi| / (2 pi |xi|), d = 3 only.
  static KernelSpec bessel();

  [[nodiscard]] KernelFamily family() const { return family_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] double constant() const { return c_; }
  [[nodiscard]] bool has_sampler() const { return dim_ == 3; }

  /// Radial profile h(r), r > 0.
  [[nodiscard]] double h(double r) const;

  /// Density of (u, w) on the strip for |xi| = r (d = 3).
  [[nodiscard]] double strip_density(double u, double w, double r) const;

  [[nodiscard]] const ScaleInvariantRatioLaw& ratio_law() const { return *ratio_law_; }

 private:
  KernelSpec(KernelFamily f, std::size_t dim, double c);

  KernelFamily family_;
  std::size_t dim_;
  double c_;
  std::shared_ptr<const ScaleInvariantRatioLaw> ratio_law_;
};

/// Normalizing constant c_d of the scale-invariant kernel, from the Riesz
/// composition formula: c_d = Gamma((d-1)/2)^2 / (pi^(d/2+1) Gamma(d/2-1)).
double scale_invariant_constant(std::size_t dim);

/// c_0 = (2 pi)^(-d/2)
double fourier_constant(std::size_t dim);

double h_value(const KernelSpec& k, const Frequency& xi);

/// H(eta | xi). Returns +infinity when eta is 0 or xi (integrable poles).
double branch_density(const KernelSpec& k, const Frequency& xi, const RealVec& eta);

struct BranchSample {
  Frequency w1;
  Frequency w2;  // xi - w1, by subtraction
};

/// Which radial law drives the sampler. Biased exists only as a negative
/// control for the goodness-of-fit harness.
enum class SamplerVariant { Exact, Biased };

/// Draws whose |W1| or |W2| fall below this are rejected and redrawn.
inline constexpr double kDegenerateFrequency = 1e-300;

/// Strip coordinates (u, w) for |xi| = r from three uniforms on (0, 1).
/// The third uniform is reserved for the azimuth.
std::array<double, 2> sample_strip(const KernelSpec& k, double r, double a, double b,
                                   SamplerVariant variant = SamplerVariant::Exact);

/// Reconstructs eta from (u, w), the azimuth uniform c and the direction of
/// xi. Returns W1 = eta as a raw vector.
RealVec place_child(const Frequency& xi, double u, double w, double c);

/// Draws W1 ~ H(.|xi) and W2 = xi - W1. `Rng` provides `double uniform()`
/// on (0, 1). Requires d = 3.
template <class Rng>
BranchSample sample_branch(const KernelSpec& k, const Frequency& xi, Rng& rng,
                           SamplerVariant variant = SamplerVariant::Exact) {
  if (!k.has_sampler() || xi.dim() != 3) throw DomainError("sample_branch: sampler requires d = 3");
  for (;;) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    const double c = rng.uniform();
    const auto uw = sample_strip(k, xi.norm(), a, b, variant);
    RealVec w1 = place_child(xi, uw[0], uw[1], c);
    RealVec w2 = xi.coords() - w1;
    if (w1.norm() < kDegenerateFrequency || w2.norm() < kDegenerateFrequency) continue;
    return BranchSample{Frequency(w1), Frequency(w2)};
  }
}

/// Relative defect of the identity (h*h)(xi) = |xi| h(xi), with the
/// convolution computed by the (u, w) strip reduction.
struct ConvolutionCheck {
  double convolution = 0.0;      // (h*h)(xi)
  double target = 0.0;           // |xi| h(xi)
  double relative_error = 0.0;
  double error_estimate = 0.0;   // quadrature error estimate, relative
  double tail = 0.0;             // analytic contribution beyond u_max
  bool converged = false;
};

struct QuadratureSpec {
  double tolerance = 1e-11;
  double u_max_factor = 1e3;  // truncate the outer integral at u_max = factor * |xi|
};

ConvolutionCheck check_convolution_identity(const KernelSpec& k, const Frequency& xi,
                                            const QuadratureSpec& quad = {});

}  // namespace cascade
