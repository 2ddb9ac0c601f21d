// SPDX-License-Identifier: Apache-2.0
#include "cascade/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace cascade {

using std::numbers::pi;

namespace {
constexpr double kFourOverPiSq = 4.0 / (pi * pi);
constexpr double kTwoOverPiSq = 2.0 / (pi * pi);

double chi2_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + 1.0;
    const double add = term / (n * n);
    sum += add;
    if (add < 1e-18 * sum) break;
    term *= x2;
  }
  return sum;
}
}  // namespace

std::string to_string(KernelFamily f) {
  return f == KernelFamily::ScaleInvariant ? "scale-invariant" : "bessel";
}

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "scale-invariant" || s == "si" || s == "ScaleInvariant") return KernelFamily::ScaleInvariant;
  if (s == "bessel" || s == "Bessel") return KernelFamily::Bessel;
  throw DomainError("unknown kernel family '" + s + "'");
}

double legendre_chi2(double x) {
  if (x < 0.0 || x > 1.0) throw DomainError("legendre_chi2: argument outside [0, 1]");
  if (x == 1.0) return pi * pi / 8.0;
  constexpr double kSplit = std::numbers::sqrt2 - 1.0;
  if (x <= kSplit) return chi2_series(x);
  // Landen: chi2(x) + chi2(y) = pi^2/8 - ln(x) ln(y) / 2 with y = (1-x)/(1+x).
  const double y = (1.0 - x) / (1.0 + x);
  return pi * pi / 8.0 - 0.5 * std::log(x) * std::log(y) - chi2_series(y);
}

ScaleInvariantRatioLaw::ScaleInvariantRatioLaw() : x_(kKnots), g_(kKnots) {
  const double lo = std::log(1e-8);
  for (std::size_t k = 0; k < kKnots; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(kKnots - 1);
    x_[k] = k + 1 == kKnots ? 1.0 : std::exp(lo * (1.0 - frac));
    g_[k] = kFourOverPiSq * legendre_chi2(x_[k]);
  }
}

double ScaleInvariantRatioLaw::density(double s) {
  if (!(s > 0.0)) return s == 0.0 ? kFourOverPiSq : 0.0;
  if (s == 1.0) return std::numeric_limits<double>::infinity();
  const double m = std::min(s, 1.0 / s);
  return kFourOverPiSq * std::atanh(m) / s;
}

double ScaleInvariantRatioLaw::cdf(double s) {
  if (!(s > 0.0)) return 0.0;
  if (std::isinf(s)) return 1.0;
  if (s <= 1.0) return kFourOverPiSq * legendre_chi2(s);
  return 1.0 - kFourOverPiSq * legendre_chi2(1.0 / s);
}

double ScaleInvariantRatioLaw::lower_half_quantile(double p) const {
  if (p >= 0.5) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double x = 0.0;
  if (p < g_.front()) {
    hi = x_.front();
    x = p / kFourOverPiSq;
  } else {
    const auto it = std::upper_bound(g_.begin(), g_.end(), p);
    const std::size_t k = static_cast<std::size_t>(it - g_.begin()) - 1;
    lo = x_[k];
    hi = x_[k + 1];
    const double frac = (p - g_[k]) / (g_[k + 1] - g_[k]);
    x = lo + frac * (hi - lo);
  }
  // Safeguarded Newton on the exact CDF; the table only supplies the bracket.
  for (int it = 0; it < 60; ++it) {
    const double f = kFourOverPiSq * legendre_chi2(x) - p;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double dens = x > 0.0 ? kFourOverPiSq * std::atanh(x) / x : kFourOverPiSq;
    double next = x - f / dens;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2e-16 * x || hi - lo <= 2e-16 * hi) return next;
    x = next;
  }
  return x;
}

double ScaleInvariantRatioLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: probability outside (0, 1)");
  if (p < 0.5) return lower_half_quantile(p);
  if (p > 0.5) return 1.0 / lower_half_quantile(1.0 - p);
  return 1.0;
}

double scale_invariant_constant(std::size_t dim) {
  if (dim < 3) throw DomainError("majorizing kernels require d >= 3");
  if (dim == 3) return 1.0 / (pi * pi * pi);
  const double d = static_cast<double>(dim);
  const double g = std::tgamma((d - 1.0) / 2.0);
  return g * g / (std::pow(pi, d / 2.0 + 1.0) * std::tgamma(d / 2.0 - 1.0));
}

double fourier_constant(std::size_t dim) {
  return std::pow(2.0 * pi, -static_cast<double>(dim) / 2.0);
}

KernelSpec::KernelSpec(KernelFamily f, std::size_t dim, double c) : family_(f), dim_(dim), c_(c) {
  if (f == KernelFamily::ScaleInvariant && dim == 3) {
    static const auto shared = std::make_shared<const ScaleInvariantRatioLaw>();
    ratio_law_ = shared;
  }
}

KernelSpec KernelSpec::scale_invariant(std::size_t dim) {
  if (dim > kMaxDim) throw DomainError("dimension exceeds supported maximum");
  return KernelSpec(KernelFamily::ScaleInvariant, dim, scale_invariant_constant(dim));
}

KernelSpec KernelSpec::bessel() { return KernelSpec(KernelFamily::Bessel, 3, 1.0 / (2.0 * pi)); }

double KernelSpec::h(double r) const {
  if (!(r > 0.0)) throw DomainError("h: zero frequency");
  if (family_ == KernelFamily::Bessel) return c_ * std::exp(-r) / r;
  if (dim_ == 3) return c_ / (r * r);
  return c_ * std::pow(r, 1.0 - static_cast<double>(dim_));
}

double KernelSpec::strip_density(double u, double w, double r) const {
  if (dim_ != 3) throw DomainError("strip_density: d = 3 only");
  if (!(u > 0.0) || !(w > 0.0) || w < std::abs(u - r) || w > u + r) return 0.0;
  if (family_ == KernelFamily::Bessel) return std::exp(-(u + w - r)) / r;
  return kTwoOverPiSq / (u * w);
}

double h_value(const KernelSpec& k, const Frequency& xi) {
  if (xi.dim() != k.dim()) throw DomainError("h_value: dimension mismatch");
  return k.h(xi.norm());
}

double branch_density(const KernelSpec& k, const Frequency& xi, const RealVec& eta) {
  if (xi.dim() != k.dim() || eta.dim() != k.dim()) throw DomainError("branch_density: dimension mismatch");
  const double u = eta.norm();
  const double w = (xi.coords() - eta).norm();
  if (u == 0.0 || w == 0.0) return std::numeric_limits<double>::infinity();
  const double r = xi.norm();
  if (k.family() == KernelFamily::Bessel) return std::exp(-(u + w - r)) / (2.0 * pi * u * w);
  if (k.dim() == 3) return k.constant() * r / (u * u * w * w);
  const double d = static_cast<double>(k.dim());
  return k.constant() * std::pow(u, 1.0 - d) * std::pow(w, 1.0 - d) * std::pow(r, d - 2.0);
}

std::array<double, 2> sample_strip(const KernelSpec& k, double r, double a, double b,
                                   SamplerVariant variant) {
  if (k.family() == KernelFamily::Bessel) {
    // p = u + w - r ~ Exp(1), q = u - w ~ Uniform(-r, r), independent.
    const double p = variant == SamplerVariant::Exact ? -std::log(a) : 3.0 * a;
    const double q = r * (2.0 * b - 1.0);
    return {0.5 * (p + r + q), 0.5 * (p + r - q)};
  }
  const double s = variant == SamplerVariant::Exact ? k.ratio_law().quantile(a) : 2.0 * a;
  const double u = s * r;
  // w | u is log-uniform on (|u - r|, u + r).
  const double lo = std::abs(u - r);
  const double hi = u + r;
  if (lo == 0.0) return {u, 0.0};
  return {u, std::exp(std::log(lo) + b * std::log(hi / lo))};
}

RealVec place_child(const Frequency& xi, double u, double w, double c) {
  const double r = xi.norm();
  const RealVec e = unit_direction(xi);
  // cos(theta) = (u^2 + r^2 - w^2) / (2 u r), with the difference of squares
  // factored; sin(theta) from Heron's formula to keep small angles accurate.
  double cos_t = ((u - w) * (u + w) + r * r) / (2.0 * u * r);
  cos_t = std::clamp(cos_t, -1.0, 1.0);
  const double f1 = std::max(0.0, -u + r + w);
  const double f2 = std::max(0.0, u - r + w);
  const double f3 = std::max(0.0, u + r - w);
  double sin_t = std::sqrt((u + r + w) * f1 * f2 * f3) / (2.0 * u * r);
  sin_t = std::clamp(sin_t, 0.0, 1.0);

  // Orthonormal frame (e, a, b) built from the axis least aligned with e.
  std::size_t axis = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(e[i]) < std::abs(e[axis])) axis = i;
  RealVec a(3);
  a[axis] = 1.0;
  a -= e[axis] * e;
  a *= 1.0 / a.norm();
  RealVec bvec{e[1] * a[2] - e[2] * a[1], e[2] * a[0] - e[0] * a[2], e[0] * a[1] - e[1] * a[0]};

  const double phi = 2.0 * pi * c;
  const double ca = u * sin_t * std::cos(phi);
  const double cb = u * sin_t * std::sin(phi);
  RealVec eta(3);
  for (std::size_t i = 0; i < 3; ++i) eta[i] = u * cos_t * e[i] + ca * a[i] + cb * bvec[i];
  return eta;
}

ConvolutionCheck check_convolution_identity(const KernelSpec& k, const Frequency& xi,
                                            const QuadratureSpec& quad) {
  using boost::math::quadrature::gauss_kronrod;
  using boost::math::quadrature::tanh_sinh;
  if (k.dim() != 3 || xi.dim() != 3) throw DomainError("check_convolution_identity: d = 3 only");

  const double r = xi.norm();
  const double u_max = quad.u_max_factor * r;
  double inner_err_max = 0.0;

  // Inner integral over w in log variables: int h(w) w dw = int h(e^t) e^{2t} dt.
  // `dist` = |u - r|, supplied separately so it stays accurate next to u = r.
  auto inner = [&](double u, double dist) {
    const double lo = std::log(std::max(dist, 1e-300));
    const double hi = std::log(u + r);
    double err = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          const double w = std::exp(t);
          return k.family() == KernelFamily::ScaleInvariant ? k.constant() : k.h(w) * w * w;
        },
        lo, hi, 12, quad.tolerance, &err);
    return std::pair{v, err};
  };
  const double target = r * k.h(r);
  // Inner errors are weighted by the outer integrand on a log-u scale, so they
  // count in proportion to their share of the target.
  auto outer = [&](double u, double dist) {
    const auto [v, err] = inner(u, dist);
    if (v == 0.0) return 0.0;
    // h(u) u without forming h(u), which overflows as u -> 0.
    const double hu = k.family() == KernelFamily::ScaleInvariant ? k.constant() / u : k.h(u) * u;
    const double f = hu * (2.0 * pi / r);
    inner_err_max = std::max(inner_err_max, f * err * u / target);
    return f * v;
  };
  // tanh_sinh passes xc = a - x left of the midpoint and xc = b - x right of it.
  auto below = [&](double x, double xc) {
    const double u = x < 0.5 * r ? -xc : x;
    return outer(u, x < 0.5 * r ? r - u : xc);
  };
  auto above = [&](double x, double xc) { return x < 1.5 * r ? outer(x, -xc) : outer(x, x - r); };
  auto far = [&](double x, double) { return outer(x, x - r); };

  tanh_sinh<double> ts;
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  const double i1 = ts.integrate(below, 0.0, r, quad.tolerance, &e1, &l1);
  const double i2 = ts.integrate(above, r, 2.0 * r, quad.tolerance, &e2, &l2);
  const double i3 = ts.integrate(far, 2.0 * r, u_max, quad.tolerance, &e3, &l3);

  ConvolutionCheck out;
  const double c = k.constant();
  if (k.family() == KernelFamily::ScaleInvariant) {
    out.tail = c * c * (2.0 * pi / r) * 2.0 * legendre_chi2(r / u_max);
  } else {
    out.tail = c * c * (2.0 * pi / r) * std::sinh(r) * std::exp(-2.0 * u_max);
  }
  out.convolution = i1 + i2 + i3 + out.tail;
  out.target = target;
  out.relative_error = std::abs(out.convolution - out.target) / out.target;
  out.error_estimate = (e1 + e2 + e3) / out.target + inner_err_max;
  out.converged = out.error_estimate < 1e-6;
  return out;
}

}  // namespace cascade
