// SPDX-License-Identifier: Apache-2.0
//
// Frequencies and complex d-vectors, with the projection and circle-dot
// product used by the vector cascade.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace cascade {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxDim = 8;

/// Raised for inputs outside an operation's domain (zero frequency, bad
/// dimension, invalid parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fixed-capacity real d-vector with runtime dimension.
class RealVec {
 public:
  RealVec() = default;
  explicit RealVec(std::size_t dim);
  RealVec(std::initializer_list<double> coords);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }

  [[nodiscard]] double norm() const;
  [[nodiscard]] double norm2() const;

  RealVec& operator+=(const RealVec& o);
  RealVec& operator-=(const RealVec& o);
  RealVec& operator*=(double s);

  friend RealVec operator+(RealVec a, const RealVec& b) { return a += b; }
  friend RealVec operator-(RealVec a, const RealVec& b) { return a -= b; }
  friend RealVec operator*(double s, RealVec a) { return a *= s; }
  friend bool operator==(const RealVec& a, const RealVec& b);

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

double dot(const RealVec& a, const RealVec& b);

/// A nonzero Fourier frequency. Construction rejects the origin.
class Frequency {
 public:
  explicit Frequency(const RealVec& coords);
  Frequency(std::initializer_list<double> coords);

  [[nodiscard]] const RealVec& coords() const { return x_; }
  [[nodiscard]] std::size_t dim() const { return x_.dim(); }
  [[nodiscard]] double norm() const { return norm_; }
  double operator[](std::size_t i) const { return x_[i]; }

 private:
  RealVec x_;
  double norm_;
};

/// Complex d-vector. The dot product with a real vector is the
/// unconjugated bilinear sum.
class ComplexVec {
 public:
  ComplexVec() = default;
  explicit ComplexVec(std::size_t dim);
  ComplexVec(std::initializer_list<Complex> comps);
  static ComplexVec from_real(const RealVec& v);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  Complex& operator[](std::size_t i) { return c_[i]; }
  const Complex& operator[](std::size_t i) const { return c_[i]; }

  /// Euclidean norm over all real and imaginary parts.
  [[nodiscard]] double norm() const;
  [[nodiscard]] double max_abs_part() const;
  [[nodiscard]] bool is_zero() const;

  ComplexVec& operator+=(const ComplexVec& o);
  ComplexVec& operator-=(const ComplexVec& o);
  ComplexVec& operator*=(Complex s);

  friend ComplexVec operator+(ComplexVec a, const ComplexVec& b) { return a += b; }
  friend ComplexVec operator-(ComplexVec a, const ComplexVec& b) { return a -= b; }
  friend ComplexVec operator*(Complex s, ComplexVec a) { return a *= s; }
  friend bool operator==(const ComplexVec& a, const ComplexVec& b);

 private:
  std::array<Complex, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

/// Unconjugated sum e_1 a_1 + ... + e_d a_d.
Complex dot(const RealVec& e, const ComplexVec& a);

/// e_xi = xi / |xi|. Throws DomainError for the zero vector.
RealVec unit_direction(const RealVec& xi);
inline RealVec unit_direction(const Frequency& xi) { return unit_direction(xi.coords()); }

/// a - (e_xi . a) e_xi
ComplexVec project_perp(const Frequency& xi, const ComplexVec& a);

/// a (.)_xi b = -i (e_xi . b) pi_perp(a). Bounded by |a||b|, perpendicular
/// to xi, neither commutative nor associative.
ComplexVec circle_dot(const Frequency& xi, const ComplexVec& a, const ComplexVec& b);

/// Same product with a precomputed unit direction; used on the hot path of
/// the cascade where e_xi is already known.
ComplexVec circle_dot_unit(const RealVec& e, const ComplexVec& a, const ComplexVec& b);

}  // namespace cascade
