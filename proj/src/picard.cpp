// SPDX-License-Identifier: Apache-2.0
#include "cascade/picard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace cascade {

namespace {

constexpr double kTwoOverPiSq = 2.0 / (std::numbers::pi * std::numbers::pi);

// Gauss-Legendre rule on [-1, 1].
template <int N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    int k = 0;
    // Boost stores the nonnegative half; the zero node (odd N) comes first.
    for (std::size_t i = 0; i < ab.size(); ++i) {
      if (ab[i] == 0.0) {
        x[k] = 0.0;
        w[k++] = wt[i];
      } else {
        x[k] = -ab[i];
        w[k++] = wt[i];
        x[k] = ab[i];
        w[k++] = wt[i];
      }
    }
  }
};

const GaussRule<2>& outer_rule() {
  static const GaussRule<2> r;
  return r;
}

const GaussRule<4>& graded_rule() {
  static const GaussRule<4> r;
  return r;
}

const GaussRule<20>& fine_rule() {
  static const GaussRule<20> r;
  return r;
}

// int_a^b F(l) dl with the 20-point rule.
template <class F>
double gl20(F&& f, double a, double b) {
  const auto& g = fine_rule();
  const double c = 0.5 * (a + b);
  const double s = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 20; ++i) acc += g.w[i] * f(c + s * g.x[i]);
  return acc * s;
}

bool log_uniform(const std::vector<double>& r) {
  if (r.size() < 2) return false;
  const double h = std::log(r[1] / r[0]);
  if (!(h > 0.0)) return false;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (std::abs(std::log(r[i] / r[i - 1]) - h) > 1e-9 * h) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

void RadialGridSpec::validate() const {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("radial grid: need 0 < r_min < r_max");
  if (r_count < 4) throw DomainError("radial grid: need at least 4 r nodes");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("radial grid: t_max must be positive");
  if (t_count < 2) throw DomainError("radial grid: need at least 2 t steps");
}

std::vector<double> RadialGridSpec::r_nodes() const {
  validate();
  std::vector<double> r(r_count);
  const double l0 = std::log(r_min);
  const double h = std::log(r_max / r_min) / static_cast<double>(r_count - 1);
  for (std::size_t i = 0; i < r_count; ++i) r[i] = std::exp(l0 + h * static_cast<double>(i));
  r.front() = r_min;
  r.back() = r_max;
  return r;
}

std::vector<double> RadialGridSpec::t_nodes() const {
  validate();
  std::vector<double> t(t_count + 1);
  for (std::size_t j = 0; j <= t_count; ++j) t[j] = t_max * static_cast<double>(j) / static_cast<double>(t_count);
  return t;
}

RadialGridSpec RadialGridSpec::coarse() const {
  RadialGridSpec c = *this;
  c.r_count = (r_count + 1) / 2;
  c.t_count = t_count / 2;
  return c;
}

RadialGrid::RadialGrid(const RadialGridSpec& spec) : r(spec.r_nodes()), t(spec.t_nodes()), values(r.size() * t.size(), 0.0) {}

std::vector<double> RadialGrid::column(std::size_t j) const {
  std::vector<double> c(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) c[i] = at(i, j);
  return c;
}

double RadialGrid::interpolate(double rr, double tt) const {
  if (!(tt >= 0.0) || tt > t.back() * (1.0 + 1e-12)) throw DomainError("interpolate: t outside the grid");
  const std::size_t n = r.size();
  const double lx = std::log(std::clamp(rr, r.front(), r.back()));
  const double l0 = std::log(r.front());
  const double h = std::log(r.back() / r.front()) / static_cast<double>(n - 1);
  const double pi = std::clamp((lx - l0) / h, 0.0, static_cast<double>(n - 1));
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pi), n - 2);
  const double a = pi - static_cast<double>(i);
  const double dt = t[1] - t[0];
  const double pj = std::clamp(tt / dt, 0.0, static_cast<double>(t.size() - 1));
  const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(pj), t.size() - 2);
  const double b = pj - static_cast<double>(j);
  return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) + a * b * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------
// Branching operator
//
// With G the cumulative of g(w) k(w) (k = 1/w for the scale-invariant
// kernel, e^{-w} for Bessel),
//   I(r) = int_0^inf f(u) m(u) [G over |u - r| .. u + r] du,
// m(u) = (2/pi^2)/u or e^{r-u}/r. For Bessel G is the upper tail
// int_x^inf so that differences of tiny values keep their precision.
// G at any x is Gn[node] + alpha g_a + beta g_{a+1}, with Gn the node
// cumulative of the current g.

BranchingOperator::BranchingOperator(const KernelSpec& k, std::vector<double> r_nodes)
    : BranchingOperator(k, r_nodes, r_nodes) {}

BranchingOperator::BranchingOperator(const KernelSpec& k, std::vector<double> r_nodes, std::vector<double> eval_r)
    : family_(k.family()), r_(std::move(r_nodes)), eval_r_(std::move(eval_r)) {
  if (k.dim() != 3) throw DomainError("branching operator: d = 3 only");
  if (!log_uniform(r_)) throw DomainError("branching operator: nodes must be log-uniform");
  for (double x : eval_r_)
    if (!(x > 0.0)) throw DomainError("branching operator: evaluation radius must be > 0");
  h_ = std::log(r_.back() / r_.front()) / static_cast<double>(r_.size() - 1);
  const std::size_t n = r_.size();
  if (family_ == KernelFamily::Bessel) {
    seg_a_.resize(n - 1);
    seg_b_.resize(n - 1);
    for (std::size_t s = 0; s + 1 < n; ++s) {
      const double l0 = std::log(r_[s]);
      const double l1 = std::log(r_[s + 1]);
      seg_a_[s] = gl20([&](double l) { const double w = std::exp(l); return (1.0 - (l - l0) / (l1 - l0)) * std::exp(-w) * w; }, l0, l1);
      seg_b_[s] = gl20([&](double l) { const double w = std::exp(l); return ((l - l0) / (l1 - l0)) * std::exp(-w) * w; }, l0, l1);
    }
  }
  build_point_tables();
}

void BranchingOperator::build_point_tables() {
  const std::size_t n = r_.size();
  const double rmin = r_.front();
  const double rmax = r_.back();
  const double lmin = std::log(rmin);
  const bool si = family_ == KernelFamily::ScaleInvariant;

  // Segment containing x in (rmin, rmax) and the position within it.
  auto locate = [&](double x, std::size_t& b, double& theta) {
    const double p = (std::log(x) - lmin) / h_;
    b = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, p)), n - 2);
    const double l0 = std::log(r_[b]);
    theta = std::clamp((std::log(x) - l0) / h_, 0.0, 1.0);
  };

  struct GCoef {
    std::int32_t g, a;
    double alpha, beta;
  };
  auto g_coef = [&](double x) -> GCoef {
    const auto last = static_cast<std::int32_t>(n - 1);
    if (si) {
      if (x <= rmin) return {0, 0, std::log(x / rmin), 0.0};
      if (x >= rmax) return {last, last, 0.0, std::log(x / rmax)};
      std::size_t b = 0;
      double th = 0.0;
      locate(x, b, th);
      const auto bi = static_cast<std::int32_t>(b);
      return {bi, bi, h_ * (th - 0.5 * th * th), 0.5 * h_ * th * th};
    }
    if (x <= rmin) return {0, 0, -std::exp(-x) * std::expm1(-(rmin - x)), 0.0};
    if (x >= rmax) return {static_cast<std::int32_t>(n), last, 0.0, std::exp(-x)};
    std::size_t b = 0;
    double th = 0.0;
    locate(x, b, th);
    const double l0 = std::log(r_[b]);
    const double l1 = std::log(r_[b + 1]);
    const double lx = std::log(x);
    const double al = gl20([&](double l) { const double w = std::exp(l); return (1.0 - (l - l0) / (l1 - l0)) * std::exp(-w) * w; }, lx, l1);
    const double be = gl20([&](double l) { const double w = std::exp(l); return ((l - l0) / (l1 - l0)) * std::exp(-w) * w; }, lx, l1);
    const auto bi = static_cast<std::int32_t>(b);
    return {bi + 1, bi, al, be};
  };

    start_.assign(1, 0);
  tail_coef_.clear();
  for (double r : eval_r_) {
    const double u_end = rmax + r;

    // Breakpoints: the nodes in u, their images r +- r_k where |u - r| or
    // u + r crosses a node, and a geometric refinement toward u = r, where
    // the scale-invariant bracket has a logarithmic singularity.
    std::vector<double> bp{0.0, r, u_end};
    bp.insert(bp.end(), r_.begin(), r_.end());
    for (double rk : r_) {
      if (rk < r) bp.push_back(r - rk);
      if (r + rk < u_end) bp.push_back(r + rk);
    }
    for (double q = 1.0; q * rmin > 1e-12 * r; q *= 0.5) {
      if (q * rmin < r) bp.push_back(r - q * rmin);
      bp.push_back(r + q * rmin);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    while (bp.back() > u_end) bp.pop_back();

    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
      const double lo = bp[s];
      const double hi = bp[s + 1];
      if (!(hi > lo)) continue;
      const double c = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      const bool graded = std::abs(c - r) < rmin;
      const double* gx = graded ? graded_rule().x.data() : outer_rule().x.data();
      const double* gw = graded ? graded_rule().w.data() : outer_rule().w.data();
      const int order = graded ? 4 : 2;
      for (int q = 0; q < order; ++q) {
        const double u = c + half * gx[q];
        const double m = si ? kTwoOverPiSq / u : std::exp(r - u) / r;
        std::int32_t a = 0;
        double lam = 1.0;
        if (u > rmax) {
          a = static_cast<std::int32_t>(n - 1);
          lam = 0.0;
        } else if (u > rmin) {
          std::size_t b = 0;
          double th = 0.0;
          locate(u, b, th);
          a = static_cast<std::int32_t>(b);
          lam = 1.0 - th;
        }
        const GCoef p = g_coef(u + r);
        const GCoef mi = g_coef(std::abs(u - r));
        w_.push_back(gw[q] * half * m);
        a_.push_back(a);
        lam_.push_back(lam);
        gp_.push_back(p.g);
        ap_.push_back(p.a);
        alp_.push_back(p.alpha);
        bep_.push_back(p.beta);
        gm_.push_back(mi.g);
        am_.push_back(mi.a);
        alm_.push_back(mi.alpha);
        bem_.push_back(mi.beta);
      }
    }
    start_.push_back(w_.size());
    // Beyond u_end both f(u) and g on [u - r, u + r] equal their tails.
    tail_coef_.push_back(si ? kTwoOverPiSq * 2.0 * legendre_chi2(r / u_end)
                            : std::exp(r) * std::sinh(r) * std::exp(-2.0 * u_end) / r);
  }
}

void BranchingOperator::node_cumulative(const double* g, std::size_t nc, std::vector<double>& gn) const {
  const std::size_t n = r_.size();
  gn.assign((n + 1) * nc, 0.0);
  if (family_ == KernelFamily::ScaleInvariant) {
    for (std::size_t k = 0; k + 1 < n; ++k)
      for (std::size_t j = 0; j < nc; ++j)
        gn[(k + 1) * nc + j] = gn[k * nc + j] + 0.5 * h_ * (g[k * nc + j] + g[(k + 1) * nc + j]);
    return;
  }
  const double e = std::exp(-r_.back());
  for (std::size_t j = 0; j < nc; ++j) gn[(n - 1) * nc + j] = g[n * nc + j] * e;
  for (std::size_t k = n - 1; k-- > 0;)
    for (std::size_t j = 0; j < nc; ++j)
      gn[k * nc + j] = gn[(k + 1) * nc + j] + seg_a_[k] * g[k * nc + j] + seg_b_[k] * g[(k + 1) * nc + j];
}

void BranchingOperator::apply(const std::vector<double>& f, const std::vector<double>& g,
                              std::vector<double>& out) const {
  const std::size_t n = r_.size();
  if (f.size() != n + 1 || g.size() != n + 1) throw DomainError("branching operator: expected nodes plus tail");
  out.assign(eval_r_.size(), 0.0);
  apply_columns(f.data(), g.data(), 1, out.data());
}

void BranchingOperator::apply_columns(const double* f, const double* g, std::size_t nc, double* out) const {
  const std::size_t n = r_.size();
  thread_local std::vector<double> gn;
  thread_local std::vector<double> acc;
  node_cumulative(g, nc, gn);
  const double sgn = family_ == KernelFamily::ScaleInvariant ? 1.0 : -1.0;
  const double* Gn = gn.data();
  acc.resize(nc);
  for (std::size_t i = 0; i < eval_r_.size(); ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double* A = acc.data();
    for (std::size_t q = start_[i]; q < start_[i + 1]; ++q) {
      const double w = w_[q];
      const double l0 = lam_[q];
      const double l1 = 1.0 - l0;
      const double ap = alp_[q], bp = bep_[q], am = alm_[q], bm = bem_[q];
      const double* f0 = f + a_[q] * nc;
      const double* f1 = f0 + nc;
      const double* cp = Gn + gp_[q] * nc;
      const double* cm = Gn + gm_[q] * nc;
      const double* p0 = g + ap_[q] * nc;
      const double* p1 = p0 + nc;
      const double* m0 = g + am_[q] * nc;
      const double* m1 = m0 + nc;
      for (std::size_t j = 0; j < nc; ++j) {
        const double fu = l0 * f0[j] + l1 * f1[j];
        const double br = (cp[j] + ap * p0[j] + bp * p1[j]) - (cm[j] + am * m0[j] + bm * m1[j]);
        A[j] += w * fu * br;
      }
    }
    for (std::size_t j = 0; j < nc; ++j)
      out[i * nc + j] = sgn * A[j] + tail_coef_[i] * f[n * nc + j] * g[n * nc + j];
  }
}

double branching_integral(const KernelSpec& k, const RadialSlice& psi, double r) {
  if (!psi.tail) throw DomainError("branching_integral: radial slice has no tail specification");
  if (psi.values.size() != psi.r.size()) throw DomainError("branching_integral: values and nodes differ in size");
  if (!std::isfinite(*psi.tail)) throw DomainError("branching_integral: tail must be finite");
  const BranchingOperator op(k, psi.r, {r});
  std::vector<double> f = psi.values;
  f.push_back(*psi.tail);
  std::vector<double> out;
  op.apply(f, f, out);
  return out[0];
}

// ---------------------------------------------------------------------------
// Picard iteration

namespace {

std::vector<double> sample_profile(const RadialProfile& g, const std::vector<double>& r, const ScalarTransform& f) {
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) v[i] = f(g(r[i]));
  return v;
}

double sup_diff(const RadialGrid& a, const RadialGrid& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace

RadialGrid picard_step(const BranchingOperator& op, const RadialGridSpec& spec, const std::vector<double>& psi0_nodes,
                       const RadialGrid& f, const RadialGrid& g) {
  RadialGrid out(spec);
  const std::size_t nr = out.r.size();
  const std::size_t nt = out.t.size();
  if (psi0_nodes.size() != nr || f.values.size() != out.values.size() || g.values.size() != out.values.size())
    throw DomainError("picard_step: grid mismatch");

  // integ[i * nt + j] = I(r_i; f(., t_j), g(., t_j)); the tail row repeats
  // the last node.
  std::vector<double> fe(f.values);
  fe.insert(fe.end(), f.values.end() - static_cast<std::ptrdiff_t>(nt), f.values.end());
  std::vector<double> ge(g.values);
  ge.insert(ge.end(), g.values.end() - static_cast<std::ptrdiff_t>(nt), g.values.end());
  std::vector<double> integ(nr * nt);
  op.apply_columns(fe.data(), ge.data(), nt, integ.data());

  const double dt = out.t[1] - out.t[0];
  for (std::size_t i = 0; i < nr; ++i) {
    // Exact weights of int r^2 e^{-(t_j - tau) r^2} I(tau) dtau over one step
    // for I linear in tau: A for the earlier node, B for the later.
    const double x = out.r[i] * out.r[i] * dt;
    const double decay = std::exp(-x);
    const double g1 = x > 0.0 ? -std::expm1(-x) / x : 1.0;
    const double wa = g1 - decay;
    const double wb = 1.0 - g1;
    double s = 0.0;
    out.at(i, 0) = psi0_nodes[i];
    for (std::size_t j = 1; j < nt; ++j) {
      s = decay * s + wa * integ[i * nt + j - 1] + wb * integ[i * nt + j];
      out.at(i, j) = std::exp(-out.t[j] * out.r[i] * out.r[i]) * psi0_nodes[i] + s;
    }
  }
  return out;
}

PicardResult run_picard(const KernelSpec& k, const RadialProfile& psi0, const RadialGridSpec& spec, int iterations,
                        const PicardOptions& opt) {
  if (iterations < 1) throw DomainError("run_picard: need at least one iteration");
  spec.validate();
  const BranchingOperator op(k, spec.r_nodes());
  const std::vector<double> p0 = sample_profile(psi0, spec.r_nodes(), ScalarTransform::identity());

  PicardResult res;
  RadialGrid cur(spec);
  res.iterates.push_back(cur);
  for (int n = 0; n < iterations; ++n) {
    RadialGrid next = picard_step(op, spec, p0, cur, cur);
    const double d = sup_diff(next, cur);
    double mx = 0.0;
    bool finite = true;
    for (double v : next.values) {
      mx = std::max(mx, v);
      finite = finite && std::isfinite(v);
    }
    res.deltas.push_back(d);
    res.iterations = n + 1;
    if (!finite || mx > kDivergenceGuard) {
      res.diverged = true;
      res.diagnostic = "iterate " + std::to_string(n + 1) + " exceeds " + std::to_string(kDivergenceGuard) +
                       ": possibly infinite minimal solution";
      if (opt.keep_iterates) res.iterates.push_back(std::move(next));
      else res.iterates.back() = std::move(next);
      return res;
    }
    if (opt.keep_iterates) res.iterates.push_back(next);
    else res.iterates.back() = next;
    cur = std::move(next);
    if (opt.stop_tolerance > 0.0 && d <= opt.stop_tolerance) {
      res.converged = true;
      break;
    }
  }
  if (opt.stop_tolerance > 0.0) res.converged = res.deltas.back() <= opt.stop_tolerance;
  return res;
}

double residual(const KernelSpec& k, const RadialGridSpec& spec, const RadialGrid& psi, const RadialProfile& psi0) {
  const BranchingOperator op(k, spec.r_nodes());
  const RadialGrid rhs =
      picard_step(op, spec, sample_profile(psi0, spec.r_nodes(), ScalarTransform::identity()), psi, psi);
  return sup_diff(psi, rhs);
}

JensenIterateReport jensen_iterate_check(const KernelSpec& k, const RadialProfile& psi0, const ScalarTransform& f,
                                         const RadialGridSpec& spec, int iterations, double tolerance) {
  if (iterations < 0) throw DomainError("jensen_iterate_check: iterations must be >= 0");
  spec.validate();
  const BranchingOperator op(k, spec.r_nodes());
  const std::vector<double> r = spec.r_nodes();
  const std::vector<double> p0 = sample_profile(psi0, r, ScalarTransform::identity());
  const std::vector<double> f0 = sample_profile(psi0, r, f);

  JensenIterateReport rep;
  rep.iterations = iterations;
  rep.tolerance = tolerance;
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  RadialGrid psi(spec);
  RadialGrid phi(spec);
  for (int n = 0;; ++n) {
    for (std::size_t i = 0; i < psi.r.size(); ++i) {
      for (std::size_t j = 0; j < psi.t.size(); ++j) {
        const double gap = f(psi.at(i, j)) - phi.at(i, j);
        if (gap > tolerance) ++rep.violations;
        if (gap > rep.worst_gap) {
          rep.worst_gap = gap;
          rep.worst_iterate = n;
          rep.worst_r = psi.r[i];
          rep.worst_t = psi.t[j];
        }
      }
    }
    if (n == iterations) break;
    RadialGrid phi_next = picard_step(op, spec, f0, phi, psi);
    RadialGrid psi_next = picard_step(op, spec, p0, psi, psi);
    phi = std::move(phi_next);
    psi = std::move(psi_next);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

double GridComparison::tolerance(double r, double t) const {
  return std::abs(fine.last().interpolate(r, t) - coarse.last().interpolate(r, t));
}

GridComparison run_picard_with_tolerance(const KernelSpec& k, const RadialProfile& psi0, const RadialGridSpec& spec,
                                         int iterations, const PicardOptions& opt) {
  PicardOptions o = opt;
  o.keep_iterates = false;
  GridComparison g;
  g.fine = run_picard(k, psi0, spec, iterations, o);
  g.coarse = run_picard(k, psi0, spec.coarse(), iterations, o);
  return g;
}

}  // namespace cascade
