// SPDX-License-Identifier: Apache-2.0
#include "cascade/herz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace cascade {

namespace {

constexpr double kShellRelTol = 1e-13;
constexpr double kRatioSlack = 1e-9;

// Sub-intervals of [lo, hi] in ln r, split at breakpoints.
std::vector<double> pieces(const RadialFunction& f, double lo, double hi) {
  std::vector<double> s{lo};
  for (double b : f.breakpoints) {
    if (!(b > 0.0)) continue;
    const double lb = std::log(b);
    if (lb > lo && lb < hi) s.push_back(lb);
  }
  s.push_back(hi);
  std::sort(s.begin(), s.end());
  return s;
}

double lq_combine(const std::vector<double>& v, double q) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, x);
  if (std::isinf(q) || mx == 0.0 || !std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::pow(x / mx, q);
  return mx * std::pow(acc, 1.0 / q);
}

}  // namespace

RadialFunction RadialFunction::from_profile(const RadialProfile& g) {
  RadialFunction f;
  f.eval = [g](double r) { return g(r); };
  f.label = g.to_string();
  if (g.kind() == ProfileKind::Annulus) f.breakpoints = {g.param(0), g.param(1)};
  if (g.kind() == ProfileKind::PowerCap) f.breakpoints = {g.param(1)};
  return f;
}

RadialFunction RadialFunction::power(double kappa, double exponent) {
  if (!(kappa >= 0.0)) throw DomainError("power function: kappa must be >= 0");
  RadialFunction f;
  f.eval = [kappa, exponent](double r) { return kappa * std::pow(r, exponent); };
  std::ostringstream os;
  os << "power:" << kappa << "," << exponent;
  f.label = os.str();
  return f;
}

HerzParams HerzParams::scale_critical(double p, double q, std::size_t dim) {
  HerzParams prm;
  prm.p = p;
  prm.q = q;
  prm.dim = dim;
  prm.alpha = static_cast<double>(dim) - 1.0 - (std::isinf(p) ? 0.0 : static_cast<double>(dim) / p);
  prm.validate();
  return prm;
}

void HerzParams::validate() const {
  if (!(p >= 1.0)) throw DomainError("herz: p must lie in [1, inf]");
  if (!(q >= 1.0)) throw DomainError("herz: q must lie in [1, inf]");
  if (!std::isfinite(alpha)) throw DomainError("herz: alpha must be finite");
  if (dim < 1) throw DomainError("herz: dimension must be >= 1");
  if (k_min > k_max) throw DomainError("herz: empty shell range");
}

double sphere_area(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

double herz_shell(const RadialFunction& f, const HerzParams& prm, int k) {
  const double lo = static_cast<double>(k) * std::numbers::ln2;
  const double hi = lo + std::numbers::ln2;
  const std::vector<double> s = pieces(f, lo, hi);

  if (std::isinf(prm.p)) {
    // ess sup of r^alpha f(r); each piece is smooth and at most unimodal for
    // the supported families, so endpoints plus one interior search suffice.
    double best = 0.0;
    auto val = [&](double x) { return std::exp(prm.alpha * x) * f(std::exp(x)); };
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double eps = 1e-12 * (s[i + 1] - s[i]);
      const double a = s[i] + eps;
      const double b = s[i + 1] - eps;
      best = std::max({best, val(a), val(b)});
      const auto m = boost::math::tools::brent_find_minima([&](double x) { return -val(x); }, a, b, 52);
      best = std::max(best, -m.second);
    }
    return best;
  }

  const double e = prm.alpha * prm.p + static_cast<double>(prm.dim);
  auto integrand = [&](double x) {
    const double fx = f(std::exp(x));
    if (fx == 0.0) return 0.0;
    return std::exp(e * x) * std::pow(fx, prm.p);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, s[i], s[i + 1], 12,
                                                                           kShellRelTol);
  return std::pow(sphere_area(prm.dim) * total, 1.0 / prm.p);
}

HerzReport herz_norm(const RadialFunction& f, const HerzParams& prm) {
  prm.validate();
  HerzReport rep;
  rep.params = prm;
  std::vector<double> vals;
  for (int k = prm.k_min; k <= prm.k_max; ++k) {
    const double v = herz_shell(f, prm, k);
    rep.shells.push_back({k, v});
    vals.push_back(v);
    if (!std::isfinite(v)) {
      rep.divergent = true;
      rep.divergent_shells.push_back(k);
    }
  }

  // Two probe shells past each end give the decay ratio of the tail.
  std::vector<double> tails;
  for (int side = 0; side < 2; ++side) {
    const int k1 = side == 0 ? prm.k_min - 1 : prm.k_max + 1;
    const int k2 = side == 0 ? prm.k_min - 2 : prm.k_max + 2;
    const double v1 = herz_shell(f, prm, k1);
    const double v2 = herz_shell(f, prm, k2);
    if (!std::isfinite(v1) || !std::isfinite(v2)) {
      rep.divergent = true;
      rep.divergent_shells.insert(rep.divergent_shells.end(), {k1, k2});
      continue;
    }
    if (v1 == 0.0) {
      tails.push_back(v2);
      continue;
    }
    const double rho = v2 / v1;
    const bool grows = std::isinf(prm.q) ? rho > 1.0 + kRatioSlack : rho >= 1.0 - kRatioSlack;
    if (grows) {
      rep.divergent = true;
      rep.divergent_shells.insert(rep.divergent_shells.end(), {k1, k2});
      continue;
    }
    tails.push_back(std::isinf(prm.q) ? v1 : v1 / std::pow(1.0 - std::pow(rho, prm.q), 1.0 / prm.q));
  }
  std::sort(rep.divergent_shells.begin(), rep.divergent_shells.end());

  if (rep.divergent) {
    rep.norm = kInf;
    rep.tail_bound = kInf;
    return rep;
  }
  rep.norm = lq_combine(vals, prm.q);
  rep.tail_bound = lq_combine(tails, prm.q);
  return rep;
}

RadialFunction normalize_data(const RadialProfile& v0, const KernelSpec& kernel) {
  const double c0 = fourier_constant(kernel.dim());
  RadialFunction f = RadialFunction::from_profile(v0);
  f.eval = [v0, kernel, c0](double r) {
    const double v = v0(r);
    return v == 0.0 ? 0.0 : c0 * v / kernel.h(r);
  };
  f.label = "normalized(" + v0.to_string() + ")";
  return f;
}

double smallness_threshold(double p, std::size_t dim, double delta) {
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("smallness_threshold: p must lie in [1, inf)");
  if (!(delta > 0.0)) throw DomainError("smallness_threshold: delta must be > 0");
  const double cd = scale_invariant_constant(dim);
  const double c0 = fourier_constant(dim);
  return std::pow(delta, 1.0 / p) * std::pow(cd / c0, 1.0 - 1.0 / p);
}

NormIdentityCheck norm_identity(const RadialProfile& v0, double p, std::size_t dim) {
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("norm_identity: p must lie in [1, inf)");
  const KernelSpec k = KernelSpec::scale_invariant(dim);
  const double c0 = fourier_constant(dim);
  const double cd = k.constant();
  const RadialFunction chi0 = normalize_data(v0, k);

  RadialFunction lhs_f = chi0;
  lhs_f.eval = [chi0, k, c0, p](double r) { return k.h(r) * std::pow(chi0(r), p) / c0; };
  HerzParams l1;
  l1.alpha = -1.0;
  l1.dim = dim;

  NormIdentityCheck out;
  out.p = p;
  out.lhs = herz_norm(lhs_f, l1).norm;
  out.rhs = std::pow(c0 / cd, p - 1.0) * std::pow(herz_norm(v0, HerzParams::scale_critical(p, p, dim)).norm, p);
  out.rel_error = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.rhs), std::numeric_limits<double>::min());
  return out;
}

}  // namespace cascade
