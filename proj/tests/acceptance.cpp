// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: every criterion prints one PASS/FAIL line with the numbers
// behind it. Exit status is nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/estimators.hpp"
#include "cascade/herz.hpp"
#include "cascade/kernels.hpp"
#include "cascade/picard.hpp"
#include "cascade/sampler_validation.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

const Frequency kUnit{1.0, 0.0, 0.0};
const std::vector<KernelSpec> kBoth{KernelSpec::scale_invariant(), KernelSpec::bessel()};

std::string name(const KernelSpec& k) { return to_string(k.family()); }

SimConfig fms_config(const KernelSpec& k, double t = 1.0) {
  SimConfig c;
  c.kernel = k;
  c.horizon = t;
  c.equation = Equation::FMS;
  return c;
}

// 1 ------------------------------------------------------------------------
void kernel_identity(Verdict& v) {
  for (const KernelSpec& k : kBoth) {
    const double limit = k.family() == KernelFamily::Bessel ? 1e-6 : 1e-4;
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
      const ConvolutionCheck c = check_convolution_identity(k, Frequency{r, 0.0, 0.0});
      worst = std::max(worst, c.relative_error);
    }
    v.detail << name(k) << " max rel err " << g(worst) << " (< " << g(limit) << "); ";
    v.require(worst < limit, name(k) + " convolution identity");
  }
}

// 2 ------------------------------------------------------------------------
void sampler(Verdict& v) {
  const BinSpec bins{20, 10};
  for (const KernelSpec& k : kBoth) {
    double min_p = 1.0, max_biased_p = 0.0;
    for (double r : {0.5, 1.0, 4.0}) {
      const GoFReport ok = validate_sampler(k, Frequency{r, 0.0, 0.0}, 1'000'000, bins, 2024);
      min_p = std::min(min_p, ok.pvalue);
      v.require(ok.pass && ok.bins == 200, name(k) + " exact sampler at r=" + g(r));
      const GoFReport bad = validate_sampler(k, Frequency{r, 0.0, 0.0}, 1'000'000, bins, 2024, SamplerVariant::Biased);
      max_biased_p = std::max(max_biased_p, bad.pvalue);
      v.require(!bad.pass, name(k) + " biased sampler should fail at r=" + g(r));
    }
    v.detail << name(k) << " min p " << g(min_p) << ", biased max p " << g(max_biased_p) << "; ";
  }
}

// 3 ------------------------------------------------------------------------
void majorize(Verdict& v) {
  for (const KernelSpec& k : kBoth) {
    const MajorizeReport r = majorize_audit(fms_config(k), InitialDataSpec(RadialProfile::constant(0.5)), 100'000, 3);
    v.detail << name(k) << " violations " << r.violations << "/" << r.n << ", max |X|/Y " << g(r.max_ratio) << "; ";
    v.require(r.violations == 0, name(k) + " pathwise |X| <= Y");
  }
}

// 4 ------------------------------------------------------------------------
void generalized(Verdict& v) {
  const SimConfig c = fms_config(KernelSpec::scale_invariant());
  for (const RadialProfile& p : {RadialProfile::constant(0.5), RadialProfile::radial_exp(1.0, 1.0)}) {
    const InitialDataSpec data(p);
    std::size_t bad = 0;
    for (const ScalarTransform& f : {ScalarTransform::power(2.0), ScalarTransform::power(3.0), ScalarTransform::square_log()}) {
      const JensenReport r = jensen_order_check(c, data, f, 100'000, 4);
      bad += r.pathwise_violations;
      v.require(r.pathwise_violations == 0, "f(Y) <= Z for " + f.to_string() + " on " + p.to_string());
    }
    double dev = 0.0;
    for (double a : {1.5, 2.0, 3.0}) {
      const JensenReport r = jensen_order_check(c, data, ScalarTransform::power(a), 100'000, 5);
      dev = std::max(dev, r.max_equality_deviation);
    }
    v.detail << p.to_string() << ": violations " << bad << ", max |Z/Y^a - 1| " << g(dev) << "; ";
    v.require(dev < 1e-10, "Z = Y^a on " + p.to_string());
  }
}

// 5 ------------------------------------------------------------------------
void holder(Verdict& v) {
  const SimConfig c = fms_config(KernelSpec::scale_invariant());
  const auto e = [](double k, double a) { return RadialProfile::radial_exp(k, a); };
  const HolderReport exact = holder_audit(c, e(1, 1), {e(1, 2), RadialProfile::constant(1.0)}, {0.5, 0.5}, 100'000, 6);
  v.detail << "exact: max dev " << g(exact.max_equality_deviation) << "; ";
  v.require(exact.max_equality_deviation < 1e-10 && exact.pathwise_violations == 0, "exact factorization equality");
  const HolderReport gen1 =
      holder_audit(c, e(0.5, 1), {RadialProfile::constant(1.0), e(1, 1)}, {0.5, 0.5}, 100'000, 7);
  const HolderReport gen2 = holder_audit(c, RadialProfile::power_cap(0.4, 2.0, 1.0),
                                         {RadialProfile::power_cap(0.8, 3.0, 1.0), RadialProfile::constant(0.6)},
                                         {0.5, 0.5}, 100'000, 8);
  v.detail << "generic: violations " << gen1.pathwise_violations + gen2.pathwise_violations << "/"
           << gen1.n + gen2.n;
  v.require(gen1.pathwise_violations == 0 && gen2.pathwise_violations == 0, "generic pathwise bound");
}

// 6 ------------------------------------------------------------------------
void thinned(Verdict& v) {
  for (Equation eq : {Equation::FMS, Equation::FNS}) {
    SimConfig c = fms_config(KernelSpec::scale_invariant());
    c.equation = eq;
    const CompareReport r = compare_thinned_minimal(c, InitialDataSpec(RadialProfile::constant(0.5)), 100'000, 9);
    v.detail << to_string(eq) << " max |z| " << g(r.max_abs_z) << "; ";
    v.require(r.max_abs_z < 4.0, to_string(eq) + " thinned vs minimal");
  }
}

// 7 ------------------------------------------------------------------------
void mc_vs_picard(Verdict& v) {
  const KernelSpec k = KernelSpec::scale_invariant();
  const std::vector<std::pair<double, double>> nodes{{0.5, 0.4}, {1, 0.5}, {1, 1}, {2, 0.5}, {2, 1}, {std::sqrt(10.0), 1}};
  double worst_ratio = 0.0;
  for (const RadialProfile& p : {RadialProfile::constant(1.0), RadialProfile::constant(0.5), RadialProfile::radial_exp(1.0, 1.0)}) {
    const GridComparison gc = run_picard_with_tolerance(k, p, RadialGridSpec{}, 64);
    for (auto [r, t] : nodes) {
      SimConfig c = fms_config(k, t);
      c.root = Frequency{r, 0.0, 0.0};
      c.depth_cap = 64;
      const EstimateReport e = estimate_solution(c, InitialDataSpec(p), 100'000, 12345);
      const double diff = std::abs(e.mean_scalar() - gc.value(r, t));
      const double allowed = 3.0 * e.std_error[0] + 2.0 * gc.tolerance(r, t);
      worst_ratio = std::max(worst_ratio, diff / allowed);
      v.require(diff < allowed, p.to_string() + " at r=" + g(r) + ", t=" + g(t) + ": |diff| " + g(diff) +
                                    " vs " + g(allowed));
    }
  }
  v.detail << "18 nodes, max |diff| / allowance " << g(worst_ratio);
}

// 8 ------------------------------------------------------------------------
void explosion(Verdict& v) {
  const ExplosionTable tab = explosion_table(kUnit, KernelSpec::scale_invariant(), {0.25, 0.5, 1.0, 2.0, 4.0},
                                             {2, 4, 8, 16, 32, 64}, 100'000, 10);
  v.detail << "monotone in t: " << (tab.nonincreasing_in_t ? "yes" : "no")
           << ", in n: " << (tab.nondecreasing_in_cap ? "yes" : "no") << "; ";
  v.require(tab.nonincreasing_in_t && tab.nondecreasing_in_cap, "exact monotone structure");

  for (int cap : {8, 64}) {
    const ScalingReport s = scaling_check(kUnit, 2.0, 1.0, 100'000, KernelSpec::scale_invariant(), 11, cap, true);
    v.detail << "scale-invariant cap " << cap << " |z| " << g(std::abs(s.z)) << "; ";
    v.require(std::abs(s.z) < 4.0, "scaling collapse at cap " + std::to_string(cap));
  }
  const ScalingReport b = scaling_check(kUnit, 2.0, 1.0, 100'000, KernelSpec::bessel(), 11, 8, true);
  v.detail << "bessel cap 8 |z| " << g(std::abs(b.z));
  v.require(std::abs(b.z) > 6.0, "bessel negative control");
}

// 9 ------------------------------------------------------------------------
void non_uniqueness(Verdict& v) {
  const KernelSpec k = KernelSpec::scale_invariant();
  const RadialGridSpec spec;
  PicardOptions opt;
  opt.stop_tolerance = 1e-14;
  opt.keep_iterates = false;
  const PicardResult res = run_picard(k, RadialProfile::constant(1.0), spec, 200, opt);
  const double limit = res.last().interpolate(2.0, 1.0);
  RadialGrid one(spec);
  std::fill(one.values.begin(), one.values.end(), 1.0);
  const double res_one = residual(k, spec, one, RadialProfile::constant(1.0));
  v.detail << "psi(2,1) = " << std::to_string(limit) << " after " << res.iterations << " iterations (last delta "
           << g(res.deltas.back()) << "), residual(1) = " << g(res_one);
  v.require(res.converged, "Picard convergence");
  v.require(limit < 0.99, "decaying minimal solution");
  v.require(res_one < 2.0 * kQuadratureTolerance, "constant fixed point");
}

// 10 -----------------------------------------------------------------------
void jensen_iterates(Verdict& v) {
  const JensenIterateReport r = jensen_iterate_check(KernelSpec::scale_invariant(), RadialProfile::constant(0.5),
                                                     ScalarTransform::power(2.0), RadialGridSpec{}, 12);
  v.detail << "violating nodes " << r.violations << ", worst f(psi) - phi " << g(r.worst_gap);
  v.require(r.pass && r.violations == 0, "phi^(n) >= f(psi^(n))");
}

// 11 -----------------------------------------------------------------------
void herz(Verdict& v) {
  HerzParams a;
  const double six_pi = herz_norm(RadialProfile::annulus(1.0, 1.0, 2.0), a).norm;
  const double annulus_err = std::abs(six_pi - 6.0 * std::acos(-1.0)) / (6.0 * std::acos(-1.0));
  v.detail << "annulus rel err " << g(annulus_err) << "; ";
  v.require(annulus_err < 1e-8, "annulus closed form");

  const std::vector<RadialProfile> fam{RadialProfile::constant(0.0), RadialProfile::radial_exp(1.0, 1.0),
                                       RadialProfile::annulus(1.0, 1.0, 2.0), RadialProfile::power_cap(1.0, 3.0, 1.0)};
  double homog = 0.0;
  for (const RadialProfile& f : fam)
    for (double p : {1.0, 2.0, kInf}) {
      const HerzParams prm = HerzParams::scale_critical(p, 2.0);
      const double base = herz_norm(f, prm).norm;
      for (double lam : {0.5, 3.0, 10.0}) {
        const double scaled = herz_norm(f.scaled(lam), prm).norm;
        homog = std::max(homog, base == 0.0 ? scaled : std::abs(scaled - lam * base) / (lam * base));
      }
    }
  v.detail << "homogeneity max rel dev " << g(homog) << "; ";
  v.require(homog < 1e-13, "amplitude homogeneity");

  bool nested = true;
  for (const RadialProfile& f : fam)
    for (double p : {1.0, 2.0, 3.0, kInf}) {
      double prev = kInf;
      for (double q : {1.0, 2.0, 3.0, kInf}) {
        HerzParams prm = HerzParams::scale_critical(p, q);
        const double n = herz_norm(f, prm).norm;
        nested = nested && n <= prev * (1.0 + 1e-12);
        prev = n;
      }
    }
  v.require(nested, "q-nesting");

  double ident = 0.0;
  for (const RadialProfile& f : {RadialProfile::constant(0.5), RadialProfile::radial_exp(1.0, 1.0),
                                 RadialProfile::annulus(1.0, 1.0, 2.0), RadialProfile::power_cap(1.0, 3.0, 1.0)})
    for (double p : {1.0, 2.0, 3.0}) {
      const NormIdentityCheck c = norm_identity(f, p);
      if (std::isfinite(c.rhs)) ident = std::max(ident, c.rel_error);
    }
  v.detail << "norm identity max rel err " << g(ident);
  v.require(ident < 1e-8, "norm identity");
}

// 12 -----------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void reproducibility(Verdict& v, const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "cascade_ns_acceptance";
  fs::create_directories(dir);
  const std::vector<std::string> runs{
      "estimate --equation fns --data exp:1,1 --xi 1,0,0 --t 0.5,1 --N 20000",
      "compare --data constant:0.5 --N 20000 --format json",
      "explosion --t 0.5,1 --caps 4,8 --N 20000 --lambda 2",
      "audit majorize --N 20000",
      "picard --r-count 64 --t-count 16 --iterations 8 --dump last",
      "norms --profile powercap:1,3,1 --alpha critical --p 2 --q 2",
  };
  std::size_t identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep));
      const std::string cmd = "\"" + cli + "\" " + runs[i] + " --seed 99 --workers 1 --output \"" + out.string() +
                              "\" 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      v.require(rc == 0, "exit status of: " + runs[i]);
      files[rep] = slurp(out);
    }
    const bool same = !files[0].empty() && files[0] == files[1];
    identical += same;
    v.require(same, "byte-identical output of: " + runs[i]);
  }
  v.detail << identical << "/" << runs.size() << " CLI runs byte-identical; ";

  std::size_t mismatched = 0;
  for (Equation eq : {Equation::FMS, Equation::FNS}) {
    SimConfig c = fms_config(KernelSpec::scale_invariant());
    c.equation = eq;
    const InitialDataSpec data(RadialProfile::radial_exp(1.0, 0.5));
    const auto a = simulate_batch(c, data, 50'000, 13, 1);
    const auto b = simulate_batch(c, data, 50'000, 13, 8);
    for (std::size_t i = 0; i < a.size(); ++i)
      mismatched += !(a[i].vec == b[i].vec && a[i].scalar == b[i].scalar && a[i].log2_scale == b[i].log2_scale &&
                      a[i].status == b[i].status);
  }
  v.detail << "per-tree mismatches between 1 and 8 workers: " << mismatched;
  v.require(mismatched == 0, "worker invariance");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = CASCADE_NS_CLI;
  if (argc > 1) cli = argv[1];

  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> all{
      {1, "kernel identity", 10, kernel_identity},
      {2, "sampler goodness of fit", 60, sampler},
      {3, "pathwise majorizing principle", 60, majorize},
      {4, "generalized majorizing principle", 120, generalized},
      {5, "Holder audit", 60, holder},
      {6, "thinned equals minimal", 120, thinned},
      {7, "Monte Carlo vs Picard oracle", 300, mc_vs_picard},
      {8, "explosion-probability structure", 120, explosion},
      {9, "non-uniqueness", 120, non_uniqueness},
      {10, "Jensen ordering of iterates", 120, jensen_iterates},
      {11, "Herz-norm suite", 10, herz},
      {12, "reproducibility", 60, [&](Verdict& v) { reproducibility(v, cli); }},
  };

  int failures = 0;
  for (const auto& c : all) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < c.budget_s, "runtime budget " + g(c.budget_s) + " s");
    failures += !v.pass;
    std::printf("criterion %2d %-34s %s  (%.1f s) %s\n", c.id, c.title, v.pass ? "PASS" : "FAIL", secs,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
