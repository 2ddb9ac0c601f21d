// SPDX-License-Identifier: Apache-2.0
#include "cascade/initial_data.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace cascade {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw DomainError("profile: bad number '" + tok + "'");
    }
    if (used != tok.size()) throw DomainError("profile: bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RadialProfile::RadialProfile(ProfileKind k, double kappa, double a, double b) : kind_(k), kappa_(kappa), p_{a, b} {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("profile: amplitude must be finite and >= 0");
}

RadialProfile RadialProfile::constant(double kappa) { return {ProfileKind::Constant, kappa}; }

RadialProfile RadialProfile::radial_exp(double kappa, double a) {
  if (!(a >= 0.0)) throw DomainError("profile exp: rate must be >= 0");
  return {ProfileKind::RadialExp, kappa, a};
}

RadialProfile RadialProfile::annulus(double kappa, double r0, double r1) {
  if (!(r0 >= 0.0) || !(r1 >= r0)) throw DomainError("profile annulus: need 0 <= r0 <= r1");
  return {ProfileKind::Annulus, kappa, r0, r1};
}

RadialProfile RadialProfile::power_cap(double kappa, double beta, double r0) {
  if (!(beta >= 0.0) || !(r0 > 0.0)) throw DomainError("profile powercap: need beta >= 0, r0 > 0");
  return {ProfileKind::PowerCap, kappa, beta, r0};
}

RadialProfile RadialProfile::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("profile: expected name:params, got '" + text + "'");
  const std::string name = text.substr(0, colon);
  const std::vector<double> v = parse_numbers(text.substr(colon + 1));
  auto need = [&](std::size_t n) {
    if (v.size() != n) throw DomainError("profile " + name + ": expected " + std::to_string(n) + " parameters");
  };
  if (name == "constant") {
    need(1);
    return constant(v[0]);
  }
  if (name == "exp") {
    need(2);
    return radial_exp(v[0], v[1]);
  }
  if (name == "annulus") {
    need(3);
    return annulus(v[0], v[1], v[2]);
  }
  if (name == "powercap") {
    need(3);
    return power_cap(v[0], v[1], v[2]);
  }
  throw DomainError("profile: unknown family '" + name + "'");
}

double RadialProfile::operator()(double r) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return kappa_;
    case ProfileKind::RadialExp:
      return kappa_ * std::exp(-p_[0] * r);
    case ProfileKind::Annulus:
      return (r >= p_[0] && r <= p_[1]) ? kappa_ : 0.0;
    case ProfileKind::PowerCap:
      return r <= p_[1] ? kappa_ : kappa_ * std::pow(r / p_[1], -p_[0]);
  }
  return 0.0;
}

double RadialProfile::log_value(double r) const {
  const double lk = std::log(kappa_);
  switch (kind_) {
    case ProfileKind::Constant:
      return lk;
    case ProfileKind::RadialExp:
      return lk - p_[0] * r;
    case ProfileKind::Annulus:
      return (r >= p_[0] && r <= p_[1]) ? lk : -std::numeric_limits<double>::infinity();
    case ProfileKind::PowerCap:
      return r <= p_[1] ? lk : lk - p_[0] * std::log(r / p_[1]);
  }
  return lk;
}

RadialProfile RadialProfile::scaled(double lambda) const {
  RadialProfile out = *this;
  if (!(lambda >= 0.0)) throw DomainError("profile: scale factor must be >= 0");
  out.kappa_ *= lambda;
  return out;
}

std::string RadialProfile::to_string() const {
  switch (kind_) {
    case ProfileKind::Constant:
      return "constant:" + fmt(kappa_);
    case ProfileKind::RadialExp:
      return "exp:" + fmt(kappa_) + "," + fmt(p_[0]);
    case ProfileKind::Annulus:
      return "annulus:" + fmt(kappa_) + "," + fmt(p_[0]) + "," + fmt(p_[1]);
    case ProfileKind::PowerCap:
      return "powercap:" + fmt(kappa_) + "," + fmt(p_[0]) + "," + fmt(p_[1]);
  }
  return {};
}

ComplexVec default_direction(std::size_t dim) {
  if (dim < 3 || dim > kMaxDim) throw DomainError("default_direction: dimension out of range");
  ComplexVec d(dim);
  d[0] = Complex(1.0 / 3.0, 0.0);
  d[1] = Complex(0.0, 2.0 / 3.0);
  d[2] = Complex(2.0 / 3.0, 0.0);
  return d;
}

InitialDataSpec::InitialDataSpec(RadialProfile g, ComplexVec dir) : profile(g), direction(dir) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("initial data: direction must be nonzero");
  if (std::abs(n - 1.0) > 1e-12) direction *= Complex(1.0 / n, 0.0);
}

ComplexVec InitialDataSpec::fns(const Frequency& xi) const {
  if (xi.dim() != direction.dim()) throw DomainError("initial data: dimension mismatch");
  return Complex(profile(xi.norm()), 0.0) * direction;
}

}  // namespace cascade
