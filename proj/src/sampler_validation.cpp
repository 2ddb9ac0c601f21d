// SPDX-License-Identifier: Apache-2.0
#include "cascade/sampler_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cascade/random.hpp"

namespace cascade {

namespace {

// Position of w across the strip at fixed u, in [0, 1]. Log-scaled for the
// scale-invariant kernel, linear for Bessel.
struct StripCoordinate {
  KernelFamily family;
  double r;

  [[nodiscard]] double position(double u, double w) const {
    const double lo = std::abs(u - r);
    const double hi = u + r;
    if (family == KernelFamily::ScaleInvariant) {
      if (lo <= 0.0) return 0.0;
      return std::log(w / lo) / std::log(hi / lo);
    }
    return (w - lo) / (hi - lo);
  }

  // w at position t, given lo = |u - r| computed by the caller.
  [[nodiscard]] double w_at(double u, double lo, double t) const {
    const double hi = u + r;
    if (family == KernelFamily::ScaleInvariant) {
      const double llo = std::log(std::max(lo, 1e-300));
      return std::exp(llo + t * (std::log(hi) - llo));
    }
    return lo + t * (hi - lo);
  }
};

// Mass of the strip density between positions t0 and t1 at fixed u, in
// closed form. `dist` is |u - r|.
double inner_mass(const KernelSpec& k, const StripCoordinate& sc, double u, double dist, double t0, double t1) {
  const double r = sc.r;
  if (!(u > 0.0)) return 0.0;
  if (k.family() == KernelFamily::ScaleInvariant) {
    // Density (2/pi^2)/(u w) is uniform in ln w across the strip.
    const double span = std::log1p(2.0 * std::min(u, r) / std::max(dist, 1e-300));
    return 2.0 / (std::numbers::pi * std::numbers::pi) / u * (t1 - t0) * span;
  }
  const double w0 = sc.w_at(u, dist, t0);
  const double w1 = sc.w_at(u, dist, t1);
  // e^{r-u} (e^{-w0} - e^{-w1}) / r, arranged to avoid overflow for large u.
  return std::exp(r - u - w0) * -std::expm1(w0 - w1) / r;
}

double cell_mass(const KernelSpec& k, const StripCoordinate& sc, double ua, double ub, double t0, double t1) {
  const double r = sc.r;
  if (std::isinf(ub)) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(
        [&](double x) {
          const double u = ua + x;
          return inner_mass(k, sc, u, ua == r ? x : std::abs(u - r), t0, t1);
        },
        1e-12);
  }
  // tanh_sinh passes xc = a - x left of the midpoint and xc = b - x right of it,
  // which keeps |u - r| accurate when r is an endpoint.
  const double mid = 0.5 * (ua + ub);
  auto f = [&](double x, double xc) {
    double dist = std::abs(x - r);
    if (x < mid && ua == r) dist = -xc;
    if (x >= mid && ub == r) dist = xc;
    const double u = x < mid && ua == 0.0 ? -xc : x;
    return inner_mass(k, sc, u, dist, t0, t1);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, ua, ub, 1e-10);
}

// Roughly equiprobable u edges from a tabulated marginal CDF, with r forced
// to be an edge so no cell straddles the singular line u = r.
std::vector<double> u_edges(const KernelSpec& k, const StripCoordinate& sc, std::size_t nb) {
  using boost::math::quadrature::gauss;
  const double r = sc.r;
  std::vector<double> grid;
  constexpr int kPts = 6000;
  for (int i = 0; i <= kPts; ++i) grid.push_back(r * std::pow(10.0, -6.0 + 12.0 * i / kPts));
  grid.push_back(r);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> cdf(grid.size(), 0.0);
  auto marginal = [&](double u) { return inner_mass(k, sc, u, std::abs(u - r), 0.0, 1.0); };
  for (std::size_t i = 1; i < grid.size(); ++i)
    cdf[i] = cdf[i - 1] + gauss<double, 7>::integrate(marginal, grid[i - 1], grid[i]);
  const double total = cdf.back();

  std::vector<double> edges{0.0};
  for (std::size_t j = 1; j < nb; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(nb);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, grid.size() - 1);
    const double frac = (target - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
    edges.push_back(grid[i - 1] + frac * (grid[i] - grid[i - 1]));
  }
  if (nb > 1) {
    std::size_t best = 1;
    for (std::size_t j = 1; j < edges.size(); ++j)
      if (std::abs(edges[j] - r) < std::abs(edges[best] - r)) best = j;
    edges[best] = r;
    std::sort(edges.begin(), edges.end());
  }
  edges.push_back(std::numeric_limits<double>::infinity());
  return edges;
}

}  // namespace

GoFReport validate_sampler(const KernelSpec& k, const Frequency& xi, std::size_t n, const BinSpec& bins,
                           std::uint64_t seed, SamplerVariant variant) {
  if (!k.has_sampler() || xi.dim() != 3) throw DomainError("validate_sampler: d = 3 only");
  if (bins.u_bins < 2 || bins.t_bins < 1) throw DomainError("validate_sampler: need at least 2 x 1 bins");

  GoFReport rep;
  rep.family = k.family();
  rep.xi = xi.coords();
  rep.n = n;
  rep.requested_bins = bins.total();
  if (n < kGofMinSamples) {
    rep.underpowered = true;
    rep.notes.push_back("underpowered: n below " + std::to_string(kGofMinSamples));
  }

  const StripCoordinate sc{k.family(), xi.norm()};
  const std::vector<double> edges = u_edges(k, sc, bins.u_bins);
  const std::size_t nu = edges.size() - 1;
  const std::size_t nt = bins.t_bins;

  std::vector<double> expected(nu * nt);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      expected[i * nt + j] = cell_mass(k, sc, edges[i], edges[i + 1], static_cast<double>(j) / nt,
                                       static_cast<double>(j + 1) / nt);
  for (double p : expected) rep.expected_mass += p;

  std::vector<double> observed(nu * nt, 0.0);
  RandomStream rng(tree_key(seed, 0));
  for (std::size_t s = 0; s < n; ++s) {
    const BranchSample b = sample_branch(k, xi, rng, variant);
    const double u = b.w1.norm();
    const double w = b.w2.norm();
    const auto it = std::upper_bound(edges.begin(), edges.end(), u);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, nu - 1);
    const double t = std::clamp(sc.position(u, w), 0.0, 1.0);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(t * nt), nt - 1);
    observed[i * nt + j] += 1.0;
  }

  // Widen cells along each u band until every expected count reaches the floor.
  const double nn = static_cast<double>(n);
  std::size_t cells = 0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    double e_acc = 0.0;
    double o_acc = 0.0;
    std::vector<std::pair<double, double>> groups;
    for (std::size_t j = 0; j < nt; ++j) {
      e_acc += nn * expected[i * nt + j];
      o_acc += observed[i * nt + j];
      if (e_acc >= kGofMinExpected) {
        groups.emplace_back(e_acc, o_acc);
        e_acc = o_acc = 0.0;
      }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
      if (groups.empty()) groups.emplace_back(e_acc, o_acc);
      else {
        groups.back().first += e_acc;
        groups.back().second += o_acc;
      }
    }
    if (groups.size() < nt) rep.widened = true;
    for (const auto& [e, o] : groups) {
      if (e > 0.0) chi2 += (o - e) * (o - e) / e;
      else if (o > 0.0) chi2 = std::numeric_limits<double>::infinity();
      ++cells;
    }
  }
  if (rep.widened) rep.notes.push_back("cells widened to keep expected counts >= 5");
  if (std::abs(rep.expected_mass - 1.0) > 1e-6)
    rep.notes.push_back("expected cell mass deviates from 1 by " + std::to_string(rep.expected_mass - 1.0));

  rep.bins = cells;
  rep.chi2 = chi2;
  rep.dof = static_cast<double>(cells - 1);
  if (std::isinf(chi2)) {
    rep.pvalue = 0.0;
  } else {
    const boost::math::chi_squared_distribution<double> dist(rep.dof);
    rep.pvalue = boost::math::cdf(boost::math::complement(dist, chi2));
  }
  rep.pass = rep.pvalue > kGofPassPValue;
  return rep;
}

}  // namespace cascade
