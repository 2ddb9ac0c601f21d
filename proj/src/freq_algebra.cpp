// SPDX-License-Identifier: Apache-2.0
#include "cascade/freq_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {
void check_dim(std::size_t d) {
  if (d == 0 || d > kMaxDim) throw DomainError("vector dimension out of range");
}
}  // namespace

RealVec::RealVec(std::size_t dim) : dim_(dim) { check_dim(dim); }

RealVec::RealVec(std::initializer_list<double> coords) : dim_(coords.size()) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

double RealVec::norm2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += c_[i] * c_[i];
  return s;
}

double RealVec::norm() const {
  // hypot-style scaling keeps tiny and huge frequencies finite.
  double m = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double q = c_[i] / m;
    s += q * q;
  }
  return m * std::sqrt(s);
}

RealVec& RealVec::operator+=(const RealVec& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

RealVec& RealVec::operator-=(const RealVec& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

RealVec& RealVec::operator*=(double s) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const RealVec& a, const RealVec& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

double dot(const RealVec& a, const RealVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

Frequency::Frequency(const RealVec& coords) : x_(coords), norm_(coords.norm()) {
  if (!(norm_ > 0.0)) throw DomainError("zero frequency is excluded from the cascade state space");
  if (!std::isfinite(norm_)) throw DomainError("frequency must be finite");
}

Frequency::Frequency(std::initializer_list<double> coords) : Frequency(RealVec(coords)) {}

ComplexVec::ComplexVec(std::size_t dim) : dim_(dim) { check_dim(dim); }

ComplexVec::ComplexVec(std::initializer_list<Complex> comps) : dim_(comps.size()) {
  check_dim(dim_);
  std::copy(comps.begin(), comps.end(), c_.begin());
}

ComplexVec ComplexVec::from_real(const RealVec& v) {
  ComplexVec out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out.c_[i] = v[i];
  return out;
}

double ComplexVec::max_abs_part() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    m = std::max(m, std::abs(c_[i].real()));
    m = std::max(m, std::abs(c_[i].imag()));
  }
  return m;
}

double ComplexVec::norm() const {
  const double m = max_abs_part();
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double re = c_[i].real() / m;
    const double im = c_[i].imag() / m;
    s += re * re + im * im;
  }
  return m * std::sqrt(s);
}

bool ComplexVec::is_zero() const { return max_abs_part() == 0.0; }

ComplexVec& ComplexVec::operator+=(const ComplexVec& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

ComplexVec& ComplexVec::operator-=(const ComplexVec& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

ComplexVec& ComplexVec::operator*=(Complex s) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const ComplexVec& a, const ComplexVec& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

Complex dot(const RealVec& e, const ComplexVec& a) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < e.dim(); ++i) s += e[i] * a[i];
  return s;
}

RealVec unit_direction(const RealVec& xi) {
  const double n = xi.norm();
  if (!(n > 0.0)) throw DomainError("unit_direction: zero frequency");
  RealVec e = xi;
  e *= 1.0 / n;
  return e;
}

ComplexVec project_perp(const Frequency& xi, const ComplexVec& a) {
  if (a.dim() != xi.dim()) throw DomainError("project_perp: dimension mismatch");
  const RealVec e = unit_direction(xi);
  const Complex ea = dot(e, a);
  ComplexVec r = a;
  for (std::size_t i = 0; i < r.dim(); ++i) r[i] -= ea * e[i];
  return r;
}

ComplexVec circle_dot_unit(const RealVec& e, const ComplexVec& a, const ComplexVec& b) {
  const Complex eb = dot(e, b);
  const Complex ea = dot(e, a);
  const Complex factor(eb.imag(), -eb.real());  // -i * (e . b)
  ComplexVec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = factor * (a[i] - ea * e[i]);
  return r;
}

ComplexVec circle_dot(const Frequency& xi, const ComplexVec& a, const ComplexVec& b) {
  if (a.dim() != xi.dim() || b.dim() != xi.dim()) throw DomainError("circle_dot: dimension mismatch");
  return circle_dot_unit(unit_direction(xi), a, b);
}

}  // namespace cascade
