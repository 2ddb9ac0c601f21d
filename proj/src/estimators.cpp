// SPDX-License-Identifier: Apache-2.0
#include "cascade/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cascade/random.hpp"

namespace cascade {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_trees(std::size_t n) {
  if (n < kMinTrees) throw DomainError("need at least " + std::to_string(kMinTrees) + " trees");
}

// Natural log of a tree's magnitude.
double ln_value(const TreeOutcome& o) { return o.log2_magnitude() * kLn2; }

}  // namespace

std::size_t default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

ComponentStats component_stats(const std::vector<std::vector<double>>& samples, bool median_of_means) {
  ComponentStats s;
  const std::size_t n = samples.size();
  if (n == 0) return s;
  const std::size_t m = samples.front().size();
  s.mean.assign(m, 0.0);
  s.std_error.assign(m, 0.0);
  s.excess_kurtosis.assign(m, 0.0);
  const double nn = static_cast<double>(n);
  for (const auto& x : samples)
    for (std::size_t j = 0; j < m; ++j) s.mean[j] += x[j];
  for (double& v : s.mean) v /= nn;
  for (std::size_t j = 0; j < m; ++j) {
    double m2 = 0.0;
    double m4 = 0.0;
    for (const auto& x : samples) {
      const double d = x[j] - s.mean[j];
      const double d2 = d * d;
      m2 += d2;
      m4 += d2 * d2;
    }
    s.std_error[j] = n > 1 ? std::sqrt(m2 / (nn - 1.0) / nn) : 0.0;
    if (m2 > 0.0) s.excess_kurtosis[j] = (m4 / nn) / ((m2 / nn) * (m2 / nn)) - 3.0;
  }
  if (median_of_means && n >= kMomBlocks) {
    s.median_of_means.assign(m, 0.0);
    const std::size_t block = n / kMomBlocks;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> means;
      for (std::size_t b = 0; b < kMomBlocks; ++b) {
        const std::size_t lo = b * block;
        const std::size_t hi = b + 1 == kMomBlocks ? n : lo + block;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += samples[i][j];
        means.push_back(acc / static_cast<double>(hi - lo));
      }
      s.median_of_means[j] = median(std::move(means));
    }
  }
  return s;
}

ComplexVec EstimateReport::mean_vector() const {
  if (equation != Equation::FNS) throw DomainError("mean_vector: FMS report has a scalar mean");
  ComplexVec v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = Complex(mean[i], mean[dim + i]);
  return v;
}

std::vector<double> value_components(const TreeOutcome& o) {
  if (o.equation == Equation::FMS) return {o.fms_value()};
  const ComplexVec v = o.fns_value();
  std::vector<double> out(2 * v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = v[i].real();
    out[v.dim() + i] = v[i].imag();
  }
  return out;
}

EstimateReport summarize(const SimConfig& cfg, const std::vector<TreeOutcome>& trees, bool median_of_means) {
  EstimateReport rep;
  rep.equation = cfg.equation;
  rep.mode = cfg.mode;
  rep.dim = cfg.root.dim();
  rep.n = trees.size();
  std::vector<std::vector<double>> comps;
  comps.reserve(trees.size());
  std::size_t done = 0;
  std::size_t capped = 0;
  std::size_t zero = 0;
  for (const auto& t : trees) {
    std::vector<double> c = value_components(t);
    if (t.status != TreeStatus::Completed) std::fill(c.begin(), c.end(), 0.0);
    comps.push_back(std::move(c));
    switch (t.status) {
      case TreeStatus::Completed:
        ++done;
        ++rep.depth_histogram[t.height];
        break;
      case TreeStatus::DepthCapped:
        ++capped;
        break;
      case TreeStatus::ThinnedZero:
        ++zero;
        break;
    }
  }
  const double nn = static_cast<double>(std::max<std::size_t>(1, trees.size()));
  rep.completed_fraction = static_cast<double>(done) / nn;
  rep.capped_fraction = static_cast<double>(capped) / nn;
  rep.thinned_zero_fraction = static_cast<double>(zero) / nn;

  ComponentStats st = component_stats(comps, median_of_means);
  rep.mean = std::move(st.mean);
  rep.std_error = std::move(st.std_error);
  rep.median_of_means = std::move(st.median_of_means);
  double s2 = 0.0;
  for (double se : rep.std_error) s2 += se * se;
  rep.std_error_norm = std::sqrt(s2);
  for (double k : st.excess_kurtosis) rep.max_excess_kurtosis = std::max(rep.max_excess_kurtosis, k);
  rep.kurtosis_flag = rep.max_excess_kurtosis > kKurtosisFlag;
  return rep;
}

std::vector<TreeOutcome> simulate_batch(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                        std::uint64_t seed, std::size_t workers) {
  cfg.validate();
  return parallel_map<TreeOutcome>(n, workers,
                                   [&](std::size_t i) { return simulate(cfg, data, tree_key(seed, i)); });
}

EstimateReport estimate_solution(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                 std::uint64_t seed, const EstimateOptions& opt) {
  require_trees(n);
  const auto trees = simulate_batch(cfg, data, n, seed, opt.workers);
  EstimateReport rep = summarize(cfg, trees, opt.median_of_means);
  if (rep.capped_fraction == 1.0) throw DomainError("horizon/depth combination fully truncated");
  return rep;
}

double ExplosionTable::p_hat(std::size_t ci, std::size_t ti) const {
  return static_cast<double>(completed.at(ci).at(ti)) / static_cast<double>(n);
}

double ExplosionTable::std_error(std::size_t ci, std::size_t ti) const {
  const double p = p_hat(ci, ti);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

ExplosionTable explosion_table(const Frequency& xi, const KernelSpec& kernel, const std::vector<double>& horizons,
                               const std::vector<int>& caps, std::size_t n, std::uint64_t seed,
                               std::size_t workers) {
  require_trees(n);
  if (caps.empty() || horizons.empty()) throw DomainError("explosion_table: need caps and horizons");
  for (std::size_t i = 0; i < caps.size(); ++i)
    if (caps[i] < 1 || (i > 0 && caps[i] <= caps[i - 1]))
      throw DomainError("explosion_table: caps must be >= 1 and strictly increasing");
  for (std::size_t i = 0; i < horizons.size(); ++i)
    if (!(horizons[i] > 0.0) || (i > 0 && horizons[i] <= horizons[i - 1]))
      throw DomainError("explosion_table: horizons must be > 0 and strictly increasing");

  ExplosionTable tab;
  tab.caps = caps;
  tab.horizons = horizons;
  tab.n = n;
  tab.completed.assign(caps.size(), std::vector<std::size_t>(horizons.size(), 0));
  for (std::size_t ti = 0; ti < horizons.size(); ++ti) {
    SimConfig cfg;
    cfg.root = xi;
    cfg.kernel = kernel;
    cfg.horizon = horizons[ti];
    cfg.depth_cap = caps.back();
    cfg.validate();
    // One pass at the largest cap: zeta_n > t iff the tree completes with
    // height below n.
    const auto heights = parallel_map<int>(n, workers, [&](std::size_t i) {
      const TreeOutcome o = explosion_indicator(cfg, tree_key(seed, i));
      return o.completed() ? o.height : std::numeric_limits<int>::max();
    });
    for (std::size_t ci = 0; ci < caps.size(); ++ci)
      for (int h : heights)
        if (h < caps[ci]) ++tab.completed[ci][ti];
  }
  for (std::size_t ci = 0; ci < caps.size(); ++ci) {
    for (std::size_t ti = 0; ti < horizons.size(); ++ti) {
      if (ti > 0 && tab.completed[ci][ti] > tab.completed[ci][ti - 1]) tab.nonincreasing_in_t = false;
      if (ci > 0 && tab.completed[ci][ti] < tab.completed[ci - 1][ti]) tab.nondecreasing_in_cap = false;
    }
  }
  return tab;
}

SweepReport depth_sweep(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                        const std::vector<int>& caps, std::uint64_t seed, const EstimateOptions& opt) {
  require_trees(n);
  if (caps.empty()) throw DomainError("depth_sweep: no caps");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (caps[i] < 1) throw DomainError("depth_sweep: caps must be >= 1");
    if (i > 0 && caps[i] <= caps[i - 1]) throw DomainError("depth_sweep: caps must be strictly increasing");
  }
  SweepReport out;
  out.caps = caps;
  if (cfg.mode == Mode::Minimal) {
    SimConfig top = cfg;
    top.depth_cap = caps.back();
    const auto trees = simulate_batch(top, data, n, seed, opt.workers);
    for (int cap : caps) {
      SimConfig at = cfg;
      at.depth_cap = cap;
      std::vector<TreeOutcome> cut = trees;
      for (auto& t : cut) {
        if (t.completed() && t.height < cap) continue;
        t.status = TreeStatus::DepthCapped;
        t.scalar = 0.0;
        if (t.equation == Equation::FNS) t.vec = ComplexVec(t.vec.dim());
        t.log2_scale = 0;
      }
      out.estimates.push_back(summarize(at, cut, opt.median_of_means));
    }
    return out;
  }
  for (int cap : caps) {
    SimConfig at = cfg;
    at.depth_cap = cap;
    out.estimates.push_back(summarize(at, simulate_batch(at, data, n, seed, opt.workers), opt.median_of_means));
  }
  return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(kGolden * (salt + 1)));
}

double z_score(double a, double se_a, double b, double se_b) {
  const double d = a - b;
  const double s = std::sqrt(se_a * se_a + se_b * se_b);
  if (s == 0.0) return d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
  return d / s;
}

CompareReport compare_thinned_minimal(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                      std::uint64_t seed, const EstimateOptions& opt) {
  require_trees(n);
  SimConfig mc = cfg;
  mc.mode = Mode::Minimal;
  SimConfig tc = cfg;
  tc.mode = Mode::Thinned;
  CompareReport rep;
  rep.minimal = summarize(mc, simulate_batch(mc, data, n, seed, opt.workers), opt.median_of_means);
  rep.thinned = summarize(tc, simulate_batch(tc, data, n, derived_seed(seed, 1), opt.workers), opt.median_of_means);
  for (std::size_t j = 0; j < rep.minimal.mean.size(); ++j) {
    const double z = z_score(rep.minimal.mean[j], rep.minimal.std_error[j], rep.thinned.mean[j],
                             rep.thinned.std_error[j]);
    rep.z.push_back(z);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
  }
  return rep;
}

ScalingReport scaling_check(const Frequency& xi, double lambda, double t, std::size_t n, const KernelSpec& kernel,
                            std::uint64_t seed, int depth_cap, bool independent, std::size_t workers) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("scaling_check: lambda must be > 0");
  require_trees(n);
  SimConfig a;
  a.root = Frequency((lambda)*xi.coords());
  a.horizon = t;
  a.depth_cap = depth_cap;
  a.kernel = kernel;
  SimConfig b = a;
  b.root = xi;
  b.horizon = lambda * lambda * t;
  a.validate();
  b.validate();
  const std::uint64_t seed_b = independent ? derived_seed(seed, 2) : seed;
  auto fraction = [&](const SimConfig& c, std::uint64_t s) {
    auto ind = parallel_map<std::vector<double>>(n, workers, [&](std::size_t i) {
      return std::vector<double>{explosion_indicator(c, tree_key(s, i)).completed() ? 1.0 : 0.0};
    });
    return component_stats(ind, false);
  };
  const ComponentStats sa = fraction(a, seed);
  const ComponentStats sb = fraction(b, seed_b);
  ScalingReport rep;
  rep.lambda = lambda;
  rep.p_scaled_frequency = sa.mean[0];
  rep.se_scaled_frequency = sa.std_error[0];
  rep.p_scaled_time = sb.mean[0];
  rep.se_scaled_time = sb.std_error[0];
  rep.z = z_score(rep.p_scaled_frequency, rep.se_scaled_frequency, rep.p_scaled_time, rep.se_scaled_time);
  return rep;
}

double transform_derivative(const ScalarTransform& f, double x) {
  switch (f.kind) {
    case ScalarTransform::Kind::Identity:
      return 1.0;
    case ScalarTransform::Kind::Power:
      return f.alpha * std::pow(x, f.alpha - 1.0);
    case ScalarTransform::Kind::SquareLog: {
      const double e2 = std::numbers::e * std::numbers::e;
      return 2.0 * x * std::log(x * x + e2) + 2.0 * x * x * x / (x * x + e2);
    }
  }
  return 1.0;
}

JensenReport jensen_order_check(const SimConfig& cfg, const InitialDataSpec& data, const ScalarTransform& f,
                                std::size_t n, std::uint64_t seed, std::size_t workers) {
  require_trees(n);
  if (cfg.equation != Equation::FMS) throw DomainError("jensen_order_check: FMS only");
  const std::vector<ScalarTransform> fs{f};
  const auto trees = parallel_map<std::vector<TreeOutcome>>(
      n, workers, [&](std::size_t i) { return simulate_scalar_family(cfg, data, fs, tree_key(seed, i)); });

  JensenReport rep;
  rep.n = n;
  rep.max_log_gap = -std::numeric_limits<double>::infinity();
  const double slack = std::log1p(kMajorizeSlack);
  std::vector<std::vector<double>> yz;
  yz.reserve(n);
  for (const auto& t : trees) {
    const double ly = ln_value(t[0]);
    const double lz = ln_value(t[1]);
    const double lfy = f.log_apply(ly);
    if (lfy > lz + slack) ++rep.pathwise_violations;
    if (std::isfinite(lfy) && std::isfinite(lz)) {
      rep.max_log_gap = std::max(rep.max_log_gap, lfy - lz);
      if (f.multiplicative())
        rep.max_equality_deviation = std::max(rep.max_equality_deviation, std::abs(std::expm1(lz - lfy)));
    } else if (std::isfinite(lfy) != std::isfinite(lz) && f.multiplicative()) {
      rep.max_equality_deviation = std::numeric_limits<double>::infinity();
    }
    yz.push_back({t[0].fms_value(), t[1].fms_value()});
  }
  const ComponentStats st = component_stats(yz, false);
  rep.mean_y = st.mean[0];
  rep.se_y = st.std_error[0];
  rep.mean_z = st.mean[1];
  rep.se_z = st.std_error[1];
  rep.f_of_mean_y = f(rep.mean_y);
  rep.se_f_of_mean_y = std::abs(transform_derivative(f, rep.mean_y)) * rep.se_y;
  rep.estimator_ok =
      rep.f_of_mean_y <= rep.mean_z + 3.0 * std::hypot(rep.se_f_of_mean_y, rep.se_z);
  return rep;
}

void validate_holder_data(const RadialProfile& y, const std::vector<RadialProfile>& xs,
                          const std::vector<double>& alphas) {
  if (xs.empty() || xs.size() + 1 > kMaxChannels) throw DomainError("holder: need 1 to 7 factor profiles");
  if (alphas.size() != xs.size()) throw DomainError("holder: one exponent per factor profile");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("holder: exponents must lie in (0, 1]");
    sum += a;
  }
  if (sum > 1.0 + 1e-12) throw DomainError("holder: exponents must sum to at most 1");

  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 4000.0));
  auto add_breaks = [&](const RadialProfile& g) {
    if (g.kind() == ProfileKind::Annulus) {
      for (double b : {g.param(0), g.param(1)}) grid.insert(grid.end(), {b, std::nextafter(b, 0.0), std::nextafter(b, 1e300)});
    } else if (g.kind() == ProfileKind::PowerCap) {
      grid.push_back(g.param(1));
    }
  };
  add_breaks(y);
  for (const auto& g : xs) add_breaks(g);
  for (double r : grid) {
    if (!(r > 0.0)) continue;
    double log_bound = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) log_bound += alphas[j] * xs[j].log_value(r);
    const double log_y = y.log_value(r);
    if (log_y > log_bound + 1e-12 * (1.0 + std::abs(log_bound)))
      throw DomainError("holder: data precondition |chi_0| <= prod chi_0j^a_j fails at r = " + std::to_string(r));
  }
}

HolderReport holder_audit(const SimConfig& cfg, const RadialProfile& y, const std::vector<RadialProfile>& xs,
                          const std::vector<double>& alphas, std::size_t n, std::uint64_t seed,
                          std::size_t workers) {
  require_trees(n);
  validate_holder_data(y, xs, alphas);
  std::vector<ScalarChannel> channels{{y, ScalarTransform::identity()}};
  for (const auto& g : xs) channels.push_back({g, ScalarTransform::identity()});
  const auto trees = parallel_map<std::vector<TreeOutcome>>(
      n, workers, [&](std::size_t i) { return simulate_channels(cfg, channels, tree_key(seed, i)); });

  HolderReport rep;
  rep.n = n;
  const double slack = std::log1p(kMajorizeSlack);
  std::vector<std::vector<double>> vals;
  vals.reserve(n);
  for (const auto& t : trees) {
    const double ly = ln_value(t[0]);
    double rhs = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) rhs += alphas[j] * ln_value(t[j + 1]);
    if (ly > rhs + slack) ++rep.pathwise_violations;
    double dev = 0.0;
    if (std::isfinite(ly) && std::isfinite(rhs)) dev = std::abs(std::expm1(ly - rhs));
    else if (std::isfinite(ly)) dev = std::numeric_limits<double>::infinity();
    else if (std::isfinite(rhs)) dev = 1.0;
    rep.max_equality_deviation = std::max(rep.max_equality_deviation, dev);
    std::vector<double> row;
    for (const auto& o : t) row.push_back(o.fms_value());
    vals.push_back(std::move(row));
  }
  const ComponentStats st = component_stats(vals, false);
  rep.mean_y = st.mean[0];
  rep.se_y = st.std_error[0];
  rep.product_bound = 1.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    rep.mean_x.push_back(st.mean[j + 1]);
    rep.se_x.push_back(st.std_error[j + 1]);
    rep.product_bound *= std::pow(st.mean[j + 1], alphas[j]);
  }
  double var = rep.se_y * rep.se_y;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (rep.mean_x[j] > 0.0) {
      const double g = alphas[j] * rep.product_bound / rep.mean_x[j] * rep.se_x[j];
      var += g * g;
    }
  }
  rep.bound_se = std::sqrt(var);
  rep.estimator_ok = rep.mean_y <= rep.product_bound + 3.0 * rep.bound_se;
  return rep;
}

MajorizeReport majorize_audit(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                              std::uint64_t seed, std::size_t workers) {
  const auto trees = parallel_map<CoupledOutcome>(
      n, workers, [&](std::size_t i) { return simulate_coupled_unchecked(cfg, data, tree_key(seed, i)); });
  MajorizeReport rep;
  rep.n = n;
  for (const auto& c : trees) {
    if (!majorized(c)) ++rep.violations;
    const double ly = c.fms.log2_magnitude();
    const double lx = c.fns.log2_magnitude();
    if (std::isfinite(ly) && std::isfinite(lx)) rep.max_ratio = std::max(rep.max_ratio, std::exp2(lx - ly));
  }
  return rep;
}

}  // namespace cascade
