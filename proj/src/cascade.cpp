// SPDX-License-Identifier: Apache-2.0
#include "cascade/cascade.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "cascade/random.hpp"

namespace cascade {

// ---------------------------------------------------------------------------
// Scaled values

namespace {

// Multiplies by 2^-k without overflowing the scale factor.
inline double scale_down(double x, int k) {
  if (k > -1000 && k < 1000) return x * std::ldexp(1.0, -k);
  return std::ldexp(x, -k);
}

inline double ldexp64(double m, std::int64_t e) {
  return std::ldexp(m, static_cast<int>(std::clamp<std::int64_t>(e, -4000, 4000)));
}

}  // namespace

ScaledReal ScaledReal::from(double x) {
  ScaledReal s{x, 0};
  s.normalize();
  return s;
}

ScaledReal ScaledReal::from_log(double ln_x) {
  if (std::isinf(ln_x) && ln_x < 0.0) return {};
  const double l2 = ln_x / std::numbers::ln2;
  const double e = std::floor(l2) + 1.0;
  ScaledReal s{std::exp2(l2 - e), static_cast<std::int64_t>(e)};
  s.normalize();
  return s;
}

void ScaledReal::normalize() {
  if (m == 0.0 || !std::isfinite(m)) {
    if (m == 0.0) e = 0;
    return;
  }
  int k = 0;
  m = std::frexp(m, &k);
  e += k;
}

double ScaledReal::value() const { return m == 0.0 ? 0.0 : ldexp64(m, e); }

double ScaledReal::log2_abs() const {
  if (m == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(std::abs(m)) + static_cast<double>(e);
}

ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
  ScaledReal out{a.m * b.m, a.e + b.e};
  out.normalize();
  return out;
}

ScaledVec ScaledVec::from(const ComplexVec& v) {
  ScaledVec s{v, 0};
  s.normalize();
  return s;
}

void ScaledVec::normalize() {
  const double mx = m.max_abs_part();
  if (mx == 0.0) {
    e = 0;
    return;
  }
  if (!std::isfinite(mx)) return;
  int k = 0;
  std::frexp(mx, &k);
  for (std::size_t i = 0; i < m.dim(); ++i) m[i] = Complex(scale_down(m[i].real(), k), scale_down(m[i].imag(), k));
  e += k;
}

ComplexVec ScaledVec::value() const {
  ComplexVec out = m;
  if (e == 0) return out;
  for (std::size_t i = 0; i < out.dim(); ++i)
    out[i] = Complex(ldexp64(out[i].real(), e), ldexp64(out[i].imag(), e));
  return out;
}

double ScaledVec::log2_norm() const {
  const double n = m.norm();
  if (n == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(n) + static_cast<double>(e);
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(Equation e) { return e == Equation::FNS ? "fns" : "fms"; }
std::string to_string(Mode m) { return m == Mode::Minimal ? "minimal" : "thinned"; }

std::string to_string(TreeStatus s) {
  switch (s) {
    case TreeStatus::Completed:
      return "completed";
    case TreeStatus::DepthCapped:
      return "depth-capped";
    case TreeStatus::ThinnedZero:
      return "thinned-zero";
  }
  return {};
}

Equation parse_equation(const std::string& s) {
  if (s == "fns") return Equation::FNS;
  if (s == "fms") return Equation::FMS;
  throw DomainError("unknown equation '" + s + "' (expected fns or fms)");
}

Mode parse_mode(const std::string& s) {
  if (s == "minimal") return Mode::Minimal;
  if (s == "thinned") return Mode::Thinned;
  throw DomainError("unknown mode '" + s + "' (expected minimal or thinned)");
}

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
  if (depth_cap < 1) throw DomainError("depth_cap must be >= 1");
  if (mode == Mode::Thinned && !(p > 0.0 && p <= 0.5)) throw DomainError("thinned p must lie in (0, 1/2]");
  if (!kernel.has_sampler() || root.dim() != 3) throw DomainError("cascade sampling requires d = 3");
}

ComplexVec TreeOutcome::fns_value() const { return ScaledVec{vec, log2_scale}.value(); }
double TreeOutcome::fms_value() const { return ScaledReal{scalar, log2_scale}.value(); }

double TreeOutcome::log2_magnitude() const {
  if (equation == Equation::FNS) return ScaledVec{vec, log2_scale}.log2_norm();
  return ScaledReal{scalar, log2_scale}.log2_abs();
}

// ---------------------------------------------------------------------------
// Transforms

ScalarTransform ScalarTransform::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("power transform: exponent must be > 0");
  return {Kind::Power, alpha};
}

ScalarTransform ScalarTransform::parse(const std::string& s) {
  if (s == "x" || s == "identity") return identity();
  if (s == "x2log") return square_log();
  std::string num;
  if (s.rfind("pow:", 0) == 0) num = s.substr(4);
  else if (s.rfind("x^", 0) == 0) num = s.substr(2);
  else throw DomainError("unknown transform '" + s + "' (expected x, pow:a, x^a or x2log)");
  std::size_t used = 0;
  double a = 0.0;
  try {
    a = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != num.size()) throw DomainError("transform: bad exponent in '" + s + "'");
  return power(a);
}

double ScalarTransform::operator()(double x) const {
  switch (kind) {
    case Kind::Identity:
      return x;
    case Kind::Power:
      return std::pow(x, alpha);
    case Kind::SquareLog:
      return x * x * std::log(x * x + std::numbers::e * std::numbers::e);
  }
  return x;
}

double ScalarTransform::log_apply(double log_x) const {
  switch (kind) {
    case Kind::Identity:
      return log_x;
    case Kind::Power:
      return alpha * log_x;
    case Kind::SquareLog: {
      if (std::isinf(log_x) && log_x < 0.0) return log_x;
      // ln(x^2 + e^2) = logaddexp(2 ln x, 2)
      const double a = 2.0 * log_x;
      const double l = std::max(a, 2.0) + std::log1p(std::exp(-std::abs(a - 2.0)));
      return a + std::log(l);
    }
  }
  return log_x;
}

std::string ScalarTransform::to_string() const {
  switch (kind) {
    case Kind::Identity:
      return "x";
    case Kind::Power: {
      std::string s = std::to_string(alpha);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return "pow:" + s;
    }
    case Kind::SquareLog:
      return "x2log";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Tree walk

namespace {

template <class Value>
struct Walk {
  Value value{};
  TreeStatus status = TreeStatus::Completed;
  std::uint64_t leaves = 0;
  std::uint64_t branches = 0;
  int height = 0;
};

// Post-order evaluation on an explicit stack. The left child (W1) is
// evaluated before the right (W2) and the parent combines left, right.
template <class Alg>
Walk<typename Alg::Value> walk_tree(const SimConfig& cfg, const Alg& alg, std::uint64_t key) {
  using Value = typename Alg::Value;
  struct Frame {
    Frequency w;
    double tau;
    std::uint64_t key;
    int depth;
    bool expanded;
  };
  thread_local std::vector<Frame> frames;
  thread_local std::vector<Value> values;
  frames.clear();
  values.clear();

  const bool thinned = cfg.mode == Mode::Thinned;
  Walk<Value> out;
  frames.push_back(Frame{cfg.root, cfg.horizon, key, 0, false});

  while (!frames.empty()) {
    Frame& top = frames.back();
    if (top.expanded) {
      Value right = std::move(values.back());
      values.pop_back();
      Value left = std::move(values.back());
      values.back() = alg.combine(top.w, left, right);
      frames.pop_back();
      continue;
    }
    RandomStream rs(top.key);
    const double r = top.w.norm();
    const double clock = rs.exponential(r * r);
    if (clock >= top.tau) {
      values.push_back(alg.leaf(top.w));
      ++out.leaves;
      out.height = std::max(out.height, top.depth);
      frames.pop_back();
      continue;
    }
    const double mark = rs.uniform();
    if (thinned && !(mark < cfg.p)) {
      out.status = TreeStatus::ThinnedZero;
      out.value = alg.zero();
      return out;
    }
    if (top.depth + 1 >= cfg.depth_cap) {
      out.status = TreeStatus::DepthCapped;
      out.value = alg.zero();
      return out;
    }
    BranchSample b = sample_branch(cfg.kernel, top.w, rs);
    ++out.branches;
    top.expanded = true;
    const double tau = top.tau - clock;
    const int depth = top.depth + 1;
    const std::uint64_t parent = top.key;
    frames.push_back(Frame{b.w2, tau, child_key(parent, 2), depth, false});
    frames.push_back(Frame{b.w1, tau, child_key(parent, 1), depth, false});
  }
  out.value = std::move(values.back());
  if (thinned && out.branches > 0) alg.scale_log2(out.value, static_cast<double>(out.branches) * -std::log2(cfg.p));
  return out;
}

void scale_log2(ScaledReal& v, double s) {
  const double fl = std::floor(s);
  v.m *= std::exp2(s - fl);
  v.e += static_cast<std::int64_t>(fl);
  v.normalize();
}

void scale_log2(ScaledVec& v, double s) {
  const double fl = std::floor(s);
  v.m *= Complex(std::exp2(s - fl), 0.0);
  v.e += static_cast<std::int64_t>(fl);
  v.normalize();
}

RealVec unit_of(const Frequency& w) { return (1.0 / w.norm()) * w.coords(); }

struct FnsAlgebra {
  using Value = ScaledVec;
  const InitialDataSpec* data;
  Value zero() const { return ScaledVec{ComplexVec(data->direction.dim()), 0}; }
  Value leaf(const Frequency& w) const { return ScaledVec::from(data->fns(w)); }
  Value combine(const Frequency& w, const Value& l, const Value& r) const {
    ScaledVec out{circle_dot_unit(unit_of(w), l.m, r.m), l.e + r.e};
    out.normalize();
    return out;
  }
  void scale_log2(Value& v, double s) const { cascade::scale_log2(v, s); }
};

struct FmsAlgebra {
  using Value = ScaledReal;
  const RadialProfile* profile;
  Value zero() const { return {}; }
  Value leaf(const Frequency& w) const { return ScaledReal::from((*profile)(w.norm())); }
  Value combine(const Frequency&, const Value& l, const Value& r) const { return l * r; }
  void scale_log2(Value& v, double s) const { cascade::scale_log2(v, s); }
};

struct CoupledAlgebra {
  struct Value {
    ScaledVec x;
    ScaledReal y;
  };
  FnsAlgebra fns;
  FmsAlgebra fms;
  Value zero() const { return {fns.zero(), fms.zero()}; }
  Value leaf(const Frequency& w) const { return {fns.leaf(w), fms.leaf(w)}; }
  Value combine(const Frequency& w, const Value& l, const Value& r) const {
    return {fns.combine(w, l.x, r.x), fms.combine(w, l.y, r.y)};
  }
  void scale_log2(Value& v, double s) const {
    cascade::scale_log2(v.x, s);
    cascade::scale_log2(v.y, s);
  }
};

struct ChannelAlgebra {
  struct Value {
    std::array<ScaledReal, kMaxChannels> c{};
  };
  const std::vector<ScalarChannel>* channels;
  Value zero() const { return {}; }
  Value leaf(const Frequency& w) const {
    Value v;
    const double r = w.norm();
    for (std::size_t i = 0; i < channels->size(); ++i) {
      const auto& ch = (*channels)[i];
      const double x = ch.transform(ch.profile(r));
      // Fall back to logs where the leaf value under- or overflows.
      v.c[i] = (x == 0.0 || std::isinf(x)) ? ScaledReal::from_log(ch.transform.log_apply(ch.profile.log_value(r)))
                                           : ScaledReal::from(x);
    }
    return v;
  }
  Value combine(const Frequency&, const Value& l, const Value& r) const {
    Value v;
    for (std::size_t i = 0; i < channels->size(); ++i) v.c[i] = l.c[i] * r.c[i];
    return v;
  }
  void scale_log2(Value& v, double s) const {
    for (std::size_t i = 0; i < channels->size(); ++i) cascade::scale_log2(v.c[i], s);
  }
};

struct NullAlgebra {
  struct Value {};
  Value zero() const { return {}; }
  Value leaf(const Frequency&) const { return {}; }
  Value combine(const Frequency&, const Value&, const Value&) const { return {}; }
  void scale_log2(Value&, double) const {}
};

template <class V>
TreeOutcome shell(Equation eq, const Walk<V>& w) {
  TreeOutcome o;
  o.equation = eq;
  o.status = w.status;
  o.leaf_count = w.leaves;
  o.branch_count = w.branches;
  o.height = w.height;
  return o;
}

template <class V>
TreeOutcome from_vec(const Walk<V>& w, const ScaledVec& v) {
  TreeOutcome o = shell(Equation::FNS, w);
  o.vec = v.m;
  o.log2_scale = v.e;
  return o;
}

template <class V>
TreeOutcome from_real(const Walk<V>& w, const ScaledReal& v) {
  TreeOutcome o = shell(Equation::FMS, w);
  o.scalar = v.m;
  o.log2_scale = v.e;
  return o;
}

TreeOutcome run_single(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  cfg.validate();
  if (cfg.equation == Equation::FNS) {
    if (data.direction.dim() != cfg.root.dim()) throw DomainError("initial data: dimension mismatch");
    const auto w = walk_tree(cfg, FnsAlgebra{&data}, key);
    return from_vec(w, w.value);
  }
  const auto w = walk_tree(cfg, FmsAlgebra{&data.profile}, key);
  return from_real(w, w.value);
}

}  // namespace

TreeOutcome simulate_minimal(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  if (cfg.mode != Mode::Minimal) throw DomainError("simulate_minimal: config mode is not minimal");
  return run_single(cfg, data, key);
}

TreeOutcome simulate_thinned(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  if (cfg.mode != Mode::Thinned) throw DomainError("simulate_thinned: config mode is not thinned");
  return run_single(cfg, data, key);
}

TreeOutcome simulate(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  return run_single(cfg, data, key);
}

CoupledOutcome simulate_coupled_unchecked(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  cfg.validate();
  if (cfg.mode != Mode::Minimal) throw DomainError("coupled evaluation requires minimal mode");
  if (data.direction.dim() != cfg.root.dim()) throw DomainError("initial data: dimension mismatch");
  const auto w = walk_tree(cfg, CoupledAlgebra{FnsAlgebra{&data}, FmsAlgebra{&data.profile}}, key);
  return {from_vec(w, w.value.x), from_real(w, w.value.y)};
}

bool majorized(const CoupledOutcome& c) {
  return c.fns.log2_magnitude() <= c.fms.log2_magnitude() + std::log2(1.0 + kMajorizeSlack);
}

CoupledOutcome simulate_coupled_fns_fms(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key) {
  CoupledOutcome out = simulate_coupled_unchecked(cfg, data, key);
  if (!majorized(out))
    throw InvariantViolation("pathwise |X| <= Y violated: log2|X| = " + std::to_string(out.fns.log2_magnitude()) +
                             ", log2 Y = " + std::to_string(out.fms.log2_magnitude()));
  return out;
}

std::vector<TreeOutcome> simulate_channels(const SimConfig& cfg, const std::vector<ScalarChannel>& channels,
                                           std::uint64_t key) {
  cfg.validate();
  if (channels.empty() || channels.size() > kMaxChannels)
    throw DomainError("simulate_channels: need 1 to " + std::to_string(kMaxChannels) + " channels");
  const auto w = walk_tree(cfg, ChannelAlgebra{&channels}, key);
  std::vector<TreeOutcome> out;
  out.reserve(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) out.push_back(from_real(w, w.value.c[i]));
  return out;
}

std::vector<TreeOutcome> simulate_scalar_family(const SimConfig& cfg, const InitialDataSpec& data,
                                                const std::vector<ScalarTransform>& transforms,
                                                std::uint64_t key) {
  if (cfg.equation != Equation::FMS) throw DomainError("scalar family requires the FMS equation");
  std::vector<ScalarChannel> channels{{data.profile, ScalarTransform::identity()}};
  for (const auto& f : transforms) channels.push_back({data.profile, f});
  return simulate_channels(cfg, channels, key);
}

TreeOutcome explosion_indicator(const SimConfig& cfg, std::uint64_t key) {
  cfg.validate();
  if (cfg.mode != Mode::Minimal) throw DomainError("explosion_indicator requires minimal mode");
  const auto w = walk_tree(cfg, NullAlgebra{}, key);
  TreeOutcome o = shell(Equation::FMS, w);
  o.scalar = w.status == TreeStatus::Completed ? 0.5 : 0.0;
  o.log2_scale = w.status == TreeStatus::Completed ? 1 : 0;
  return o;
}

}  // namespace cascade
