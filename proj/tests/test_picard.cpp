// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cascade/picard.hpp"
#include "cascade/random.hpp"
#include "generators.hpp"

using namespace cascade;

namespace {

RadialGridSpec small_grid() {
  RadialGridSpec s;
  s.r_count = 96;
  s.t_count = 32;
  return s;
}

RadialSlice slice(const std::vector<double>& r, double (*f)(double), double tail) {
  RadialSlice s;
  s.r = r;
  for (double x : r) s.values.push_back(f(x));
  s.tail = tail;
  return s;
}

const std::vector<KernelSpec> kKernels{KernelSpec::scale_invariant(), KernelSpec::bessel()};

// The node cumulatives subtract O(1) quantities, so comparisons between grids
// carry absolute rounding noise of a few ulps of the largest value.
constexpr double kRounding = 1e-15;

}  // namespace

TEST_CASE("grid spec validation and node layout") {
  RadialGridSpec s;
  const auto r = s.r_nodes();
  const auto t = s.t_nodes();
  CHECK(r.size() == 256);
  CHECK(t.size() == 129);
  CHECK(r.front() == doctest::Approx(1e-2));
  CHECK(r.back() == doctest::Approx(1e2));
  CHECK(t.front() == 0.0);
  CHECK(t.back() == doctest::Approx(1.0));
  CHECK(std::log(r[1] / r[0]) == doctest::Approx(std::log(r[200] / r[199])).epsilon(1e-12));
  s.r_min = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = RadialGridSpec{};
  s.t_count = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("grid interpolation reproduces node values and linear-in-log data") {
  RadialGrid g(small_grid());
  for (std::size_t i = 0; i < g.r.size(); ++i)
    for (std::size_t j = 0; j < g.t.size(); ++j) g.at(i, j) = 2.0 * std::log(g.r[i]) + 3.0 * g.t[j];
  gen::Gen gen(5);
  for (int it = 0; it < 200; ++it) {
    const double r = gen.log_uniform(g.r.front(), g.r.back());
    const double t = gen.uniform(0.0, 1.0);
    CHECK(g.interpolate(r, t) == doctest::Approx(2.0 * std::log(r) + 3.0 * t).epsilon(1e-12).scale(1.0));
  }
  CHECK(g.interpolate(g.r[5], g.t[7]) == doctest::Approx(g.at(5, 7)).epsilon(1e-14));
}

TEST_CASE("branching integral of constants") {
  const RadialGridSpec s;
  const auto r = s.r_nodes();
  for (const KernelSpec& k : kKernels) {
    for (double c : {1.0, 0.5, 3.0}) {
      RadialSlice sl;
      sl.r = r;
      sl.values.assign(r.size(), c);
      sl.tail = c;
      for (double x : {1e-2, 0.3, 1.0, 7.0, 1e2})
        CHECK(branching_integral(k, sl, x) == doctest::Approx(c * c).epsilon(1e-7));
    }
  }
  RadialSlice bad;
  bad.r = r;
  bad.values.assign(r.size(), 1.0);
  CHECK_THROWS_AS(branching_integral(kKernels[0], bad, 1.0), DomainError);
}

TEST_CASE("branching integral of exp(-u) matches Monte Carlo over sample_branch") {
  const RadialGridSpec s;
  const RadialSlice sl = slice(s.r_nodes(), [](double u) { return std::exp(-u); }, 0.0);
  const Frequency xi{0.0, 0.0, 1.0};
  constexpr std::size_t n = 1000000;
  for (const KernelSpec& k : kKernels) {
    RandomStream rng(tree_key(2024, 0));
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const BranchSample b = sample_branch(k, xi, rng);
      const double v = std::exp(-b.w1.norm() - b.w2.norm());
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    const double quad = branching_integral(k, sl, 1.0);
    CHECK(std::abs(quad - mean) < 3.0 * se);
  }
}

TEST_CASE("first iterates: zero, then the free evolution") {
  const RadialGridSpec s = small_grid();
  const RadialProfile g = RadialProfile::radial_exp(0.8, 0.5);
  const PicardResult res = run_picard(KernelSpec::scale_invariant(), g, s, 2);
  REQUIRE(res.iterates.size() == 3);
  for (double v : res.iterates[0].values) CHECK(v == 0.0);
  const RadialGrid& one = res.iterates[1];
  for (std::size_t i = 0; i < one.r.size(); ++i)
    for (std::size_t j = 0; j < one.t.size(); ++j)
      CHECK(one.at(i, j) == doctest::Approx(std::exp(-one.t[j] * one.r[i] * one.r[i]) * g(one.r[i])).epsilon(1e-14));
  CHECK_THROWS_AS(run_picard(KernelSpec::scale_invariant(), g, s, 0), DomainError);
}

TEST_CASE("iterates increase in n and converge geometrically for small data") {
  const RadialGridSpec s = small_grid();
  for (const KernelSpec& k : kKernels) {
    const PicardResult res = run_picard(k, RadialProfile::constant(0.25), s, 30);
    for (std::size_t n = 1; n < res.iterates.size(); ++n) {
      const auto& a = res.iterates[n - 1].values;
      const auto& b = res.iterates[n].values;
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] >= a[i] - kRounding);
    }
    for (std::size_t n = 3; n < res.deltas.size() && res.deltas[n] > 1e-13; ++n)
      CHECK(res.deltas[n] < 0.9 * res.deltas[n - 1]);
    CHECK(res.deltas.back() < 1e-12);
  }
}

TEST_CASE("unit data: limit below one, constant one is a fixed point") {
  const RadialGridSpec s = small_grid();
  for (const KernelSpec& k : kKernels) {
    PicardOptions opt;
    opt.stop_tolerance = 1e-13;
    const PicardResult res = run_picard(k, RadialProfile::constant(1.0), s, 200, opt);
    CHECK(res.converged);
    const RadialGrid& lim = res.last();
    for (std::size_t i = 0; i < lim.r.size(); ++i) {
      CHECK(lim.at(i, 0) == doctest::Approx(1.0).epsilon(1e-15));
      for (std::size_t j = 1; j < lim.t.size(); ++j) CHECK(lim.at(i, j) <= 1.0);
    }
    // Only the scale-invariant cascade explodes appreciably by t = 1.
    if (k.family() == KernelFamily::ScaleInvariant) CHECK(lim.interpolate(2.0, 1.0) < 0.99);

    RadialGrid one(s);
    std::fill(one.values.begin(), one.values.end(), 1.0);
    CHECK(residual(k, s, one, RadialProfile::constant(1.0)) < 2.0 * kQuadratureTolerance);
    CHECK(residual(k, s, lim, RadialProfile::constant(1.0)) < 10.0 * (res.deltas.back() + kQuadratureTolerance));
  }
}

TEST_CASE("residual of the zero grid is the free evolution") {
  const RadialGridSpec s = small_grid();
  const RadialGrid zero(s);
  const RadialProfile g = RadialProfile::radial_exp(1.0, 2.0);
  double want = 0.0;
  for (double r : zero.r)
    for (double t : zero.t) want = std::max(want, std::exp(-t * r * r) * g(r));
  CHECK(residual(KernelSpec::scale_invariant(), s, zero, g) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("e^{t r^2} psi is nondecreasing in t") {
  const RadialGridSpec s = small_grid();
  for (const RadialProfile& g : {RadialProfile::constant(1.0), RadialProfile::radial_exp(1.0, 1.0)}) {
    const PicardResult res = run_picard(KernelSpec::scale_invariant(), g, s, 60);
    const RadialGrid& lim = res.last();
    for (std::size_t i = 0; i < lim.r.size(); ++i) {
      const double r2 = lim.r[i] * lim.r[i];
      for (std::size_t j = 1; j < lim.t.size(); ++j) {
        const double a = std::exp(lim.t[j - 1] * r2) * lim.at(i, j - 1);
        const double b = std::exp(lim.t[j] * r2) * lim.at(i, j);
        CHECK(b >= a * (1.0 - kQuadratureTolerance));
      }
    }
  }
}

TEST_CASE("comparison principle on the converged grids") {
  const RadialGridSpec s = small_grid();
  gen::Gen g(37);
  for (int rep = 0; rep < 3; ++rep) {
    const RadialProfile lo = g.profile(0.6);
    const RadialProfile hi = lo.scaled(g.uniform(1.0, 1.6));
    const KernelSpec& k = kKernels[rep % 2];
    const RadialGrid a = run_picard(k, lo, s, 40).last();
    const RadialGrid b = run_picard(k, hi, s, 40).last();
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] <= b.values[i] + kRounding);
  }
}

TEST_CASE("scale-invariant kernel with constant data depends on r^2 t only") {
  const RadialGridSpec s;
  const GridComparison gc = run_picard_with_tolerance(KernelSpec::scale_invariant(), RadialProfile::constant(0.5), s, 40);
  const double ref = gc.value(1.0, 1.0);
  for (auto [r, t] : {std::pair{2.0, 0.25}, {std::sqrt(2.0), 0.5}, {4.0, 1.0 / 16.0}, {10.0, 0.01}}) {
    const double tol = 2.0 * (gc.tolerance(r, t) + gc.tolerance(1.0, 1.0)) + 1e-6;
    CHECK(std::abs(gc.value(r, t) - ref) < tol);
  }
  // The Bessel kernel has no such symmetry.
  const GridComparison gb = run_picard_with_tolerance(KernelSpec::bessel(), RadialProfile::constant(0.5), s, 40);
  CHECK(std::abs(gb.value(2.0, 0.25) - gb.value(1.0, 1.0)) > 1e-3);
}

TEST_CASE("mixed Jensen recursion") {
  const RadialGridSpec s = small_grid();
  const KernelSpec k = KernelSpec::scale_invariant();
  const JensenIterateReport id = jensen_iterate_check(k, RadialProfile::constant(0.5), ScalarTransform::identity(), s, 8);
  CHECK(id.pass);
  CHECK(id.worst_gap == 0.0);
  const JensenIterateReport base = jensen_iterate_check(k, RadialProfile::constant(0.5), ScalarTransform::power(2.0), s, 0);
  CHECK(base.pass);
  CHECK(base.worst_gap == 0.0);
  for (const ScalarTransform& f : {ScalarTransform::power(2.0), ScalarTransform::power(3.0), ScalarTransform::square_log()}) {
    const JensenIterateReport r = jensen_iterate_check(k, RadialProfile::radial_exp(0.5, 0.3), f, s, 12);
    CHECK(r.pass);
    CHECK(r.violations == 0);
  }
}

TEST_CASE("large data trips the divergence guard") {
  RadialGridSpec s = small_grid();
  s.t_max = 4.0;
  const PicardResult res = run_picard(KernelSpec::scale_invariant(), RadialProfile::constant(50.0), s, 200);
  CHECK(res.diverged);
  CHECK_FALSE(res.converged);
  CHECK(res.diagnostic.find("possibly infinite minimal solution") != std::string::npos);
}
