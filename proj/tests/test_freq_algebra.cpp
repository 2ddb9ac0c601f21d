// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cascade/freq_algebra.hpp"
#include "generators.hpp"

using namespace cascade;

namespace {

const Complex I{0.0, 1.0};

bool close(const ComplexVec& a, const ComplexVec& b, double tol) {
  return (a - b).norm() <= tol;
}

}  // namespace

TEST_CASE("unit_direction examples") {
  const RealVec e = unit_direction(Frequency{2.0, 0.0, 0.0});
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 0.0);
  const RealVec f = unit_direction(Frequency{1.0, 1.0, 0.0});
  CHECK(f[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(unit_direction(RealVec{0.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(Frequency(RealVec{0.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("project_perp examples") {
  const Frequency x{1.0, 0.0, 0.0};
  CHECK(close(project_perp(x, {0.0, 1.0, 0.0}), ComplexVec{0.0, 1.0, 0.0}, 0.0));
  CHECK(project_perp(x, {1.0, 0.0, 0.0}).is_zero());
  // a - (e.a) e with e = (1,1,0)/sqrt2 and a = e_1 is (1/2, -1/2, 0).
  const ComplexVec p = project_perp(Frequency{1.0, 1.0, 0.0}, {1.0, 0.0, 0.0});
  CHECK(close(p, ComplexVec{0.5, -0.5, 0.0}, 1e-15));
}

TEST_CASE("circle_dot examples and non-commutativity") {
  const Frequency x{1.0, 0.0, 0.0};
  const ComplexVec a{0.0, 1.0, 0.0};
  const ComplexVec b{1.0, 0.0, 0.0};
  CHECK(close(circle_dot(x, a, b), ComplexVec{0.0, -I, 0.0}, 0.0));
  CHECK(circle_dot(x, a, a).is_zero());
  // Swapping the roles gives zero, so the product is not commutative.
  CHECK(circle_dot(x, b, a).is_zero());
}

TEST_CASE("circle_dot matches its defining formula on random inputs") {
  gen::Gen g(101);
  for (int it = 0; it < 500; ++it) {
    const Frequency xi = g.frequency(3);
    const ComplexVec a = g.complex_vec(3);
    const ComplexVec b = g.complex_vec(3);
    // Independent evaluation: -i (e.b) (a - (e.a) e).
    const RealVec e = (1.0 / xi.norm()) * xi.coords();
    Complex eb = 0.0, ea = 0.0;
    for (int i = 0; i < 3; ++i) {
      eb += e[i] * b[i];
      ea += e[i] * a[i];
    }
    ComplexVec want(3);
    for (int i = 0; i < 3; ++i) want[i] = -I * eb * (a[i] - ea * e[i]);
    CHECK(close(circle_dot(xi, a, b), want, 1e-12 * (1.0 + a.norm() * b.norm())));
    CHECK(close(circle_dot_unit(unit_direction(xi), a, b), circle_dot(xi, a, b), 0.0));
  }
}

TEST_CASE("circle_dot bound, orthogonality and projection idempotence") {
  gen::Gen g(7);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t d = static_cast<std::size_t>(g.integer(3, 6));
    const Frequency xi = g.frequency(d);
    const double sa = g.log_uniform(1e-6, 1e6);
    const ComplexVec a = g.complex_vec(d, sa);
    const ComplexVec b = g.complex_vec(d, g.log_uniform(1e-6, 1e6));
    const ComplexVec c = circle_dot(xi, a, b);
    const double ab = a.norm() * b.norm();
    CHECK(c.norm() <= ab * (1.0 + 1e-12));
    CHECK(std::abs(dot(unit_direction(xi), c)) <= 1e-12 * ab);

    const ComplexVec p = project_perp(xi, a);
    CHECK(close(project_perp(xi, p), p, 1e-12 * a.norm()));
    CHECK(std::abs(dot(unit_direction(xi), p)) <= 1e-12 * a.norm());
  }
}

TEST_CASE("bound is attained when b is parallel to xi and a is perpendicular") {
  gen::Gen g(11);
  for (int it = 0; it < 100; ++it) {
    const Frequency xi = g.frequency(3);
    const RealVec e = unit_direction(xi);
    const ComplexVec a = project_perp(xi, g.complex_vec(3));
    const Complex s{g.uniform(-2, 2), g.uniform(-2, 2)};
    const ComplexVec b = s * ComplexVec::from_real(e);
    CHECK(circle_dot(xi, a, b).norm() == doctest::Approx(a.norm() * b.norm()).epsilon(1e-12));
  }
}

TEST_CASE("vector arithmetic and norms") {
  const ComplexVec a{Complex(3.0, 4.0), 0.0, 0.0};
  CHECK(a.norm() == doctest::Approx(5.0));
  CHECK(a.max_abs_part() == 4.0);
  const RealVec v{3.0, 4.0, 12.0};
  CHECK(v.norm() == doctest::Approx(13.0));
  CHECK(Frequency(v).norm() == doctest::Approx(13.0));
  CHECK(dot(v, v) == doctest::Approx(169.0));
}
