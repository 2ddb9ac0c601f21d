// SPDX-License-Identifier: Apache-2.0
#include "cascade/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "cascade/estimators.hpp"
#include "cascade/herz.hpp"
#include "cascade/picard.hpp"
#include "cascade/reports.hpp"
#include "cascade/sampler_validation.hpp"

namespace cascade::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string kernel = "scale-invariant";
  std::string equation = "fms";
  std::string mode = "minimal";
  double p = 0.5;
  std::string data = "constant:1";
  std::vector<std::string> xi;
  std::vector<double> t;
  std::size_t n = 100000;
  int depth_cap = kDefaultDepthCap;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::string output;
  std::string format = "csv";
  bool strict = false;

  // estimate
  bool median_of_means = false;
  // explosion / sweep
  std::vector<int> caps;
  double lambda = 0.0;
  bool independent = false;
  // audits
  std::vector<std::string> transforms;
  std::string y_profile = "exp:1,1";
  std::vector<std::string> x_profiles;
  std::vector<double> alphas;
  int iterations = -1;
  double tolerance = kQuadratureTolerance;
  // picard grid
  RadialGridSpec grid;
  double stop_tolerance = 0.0;
  std::string dump = "last";
  std::vector<std::string> at;
  std::string log_path;
  // norms
  std::string profile = "annulus:1,1,2";
  std::string alpha = "critical";
  std::string herz_p = "1";
  std::string herz_q = "1";
  std::size_t dim = 3;
  int k_min = -40;
  int k_max = 40;
  double delta = kDefaultSmallnessDelta;
  bool normalize = false;
  // validate-kernel
  std::vector<double> radii;
  std::size_t u_bins = 20;
  std::size_t t_bins = 10;
  bool biased = false;
  bool skip_gof = false;
};

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double x = std::stod(item, &pos);
    if (pos != item.size()) throw DomainError("not a number: '" + item + "'");
    v.push_back(x);
  }
  return v;
}

Frequency parse_xi(const std::string& s) {
  std::vector<double> c;
  try {
    c = split_numbers(s);
  } catch (const std::logic_error&) {
    throw DomainError("xi: expected comma-separated coordinates, got '" + s + "'");
  }
  if (c.empty() || c.size() > kMaxDim) throw DomainError("xi: bad dimension in '" + s + "'");
  RealVec v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i];
  return Frequency(v);
}

double parse_extended(const std::string& s, const std::string& field) {
  if (s == "inf" || s == "infinity") return kInf;
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos == s.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw DomainError(field + ": not a number: '" + s + "'");
}

KernelSpec make_kernel(const std::string& name, std::size_t dim = 3) {
  return parse_kernel_family(name) == KernelFamily::Bessel ? KernelSpec::bessel() : KernelSpec::scale_invariant(dim);
}

std::vector<Frequency> frequencies(const Options& o) {
  std::vector<Frequency> v;
  for (const auto& s : o.xi.empty() ? std::vector<std::string>{"1,0,0"} : o.xi) v.push_back(parse_xi(s));
  return v;
}

std::vector<double> horizons(const Options& o) { return o.t.empty() ? std::vector<double>{1.0} : o.t; }

SimConfig base_config(const Options& o) {
  SimConfig c;
  c.kernel = make_kernel(o.kernel);
  c.equation = parse_equation(o.equation);
  c.mode = parse_mode(o.mode);
  c.p = o.p;
  c.depth_cap = o.depth_cap;
  return c;
}

SimConfig at(SimConfig c, const Frequency& xi, double t) {
  c.root = xi;
  c.horizon = t;
  c.validate();
  return c;
}

std::size_t workers(const Options& o) { return o.workers == 0 ? default_workers() : o.workers; }

struct Outcome {
  Json records = Json::array();
  Json extra = Json::object();
  std::string summary;
  bool violation = false;
};

Outcome cmd_estimate(const Options& o) {
  Outcome out;
  const InitialDataSpec data(RadialProfile::parse(o.data));
  EstimateOptions eo{workers(o), o.median_of_means};
  std::size_t rows = 0;
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      const SimConfig cfg = at(base_config(o), xi, t);
      const EstimateReport rep = estimate_solution(cfg, data, o.n, o.seed, eo);
      out.records.push_back(estimate_record(o.seed, cfg, o.n, rep));
      if (++rows == 1) out.summary = "estimate: mean[0]=" + format_number(rep.mean.at(0));
    }
  }
  out.summary += " (" + std::to_string(rows) + " row(s))";
  return out;
}

Outcome cmd_explosion(const Options& o) {
  Outcome out;
  const KernelSpec k = make_kernel(o.kernel);
  const std::vector<int> caps = o.caps.empty() ? std::vector<int>{8, 16, 32, 64} : o.caps;
  bool monotone = true;
  for (const auto& xi : frequencies(o)) {
    const ExplosionTable tab = explosion_table(xi, k, horizons(o), caps, o.n, o.seed, workers(o));
    for (auto& r : explosion_records(o.seed, k, xi.coords(), tab)) out.records.push_back(r);
    monotone = monotone && tab.nonincreasing_in_t && tab.nondecreasing_in_cap;
    if (o.lambda > 0.0) {
      const double t = horizons(o).front();
      const ScalingReport s = scaling_check(xi, o.lambda, t, o.n, k, o.seed, caps.back(), o.independent, workers(o));
      out.records.push_back(scaling_record(o.seed, to_string(k.family()), xi.coords(), t, o.n, caps.back(), s));
    }
  }
  out.violation = !monotone;
  out.summary = std::string("explosion: monotone structure ") + (monotone ? "holds" : "VIOLATED");
  return out;
}

Outcome cmd_sweep(const Options& o) {
  Outcome out;
  const InitialDataSpec data(RadialProfile::parse(o.data));
  const std::vector<int> caps = o.caps.empty() ? std::vector<int>{4, 8, 16, 32, 64} : o.caps;
  EstimateOptions eo{workers(o), o.median_of_means};
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      const SimConfig cfg = at(base_config(o), xi, t);
      const SweepReport sw = depth_sweep(cfg, data, o.n, caps, o.seed, eo);
      for (std::size_t i = 0; i < sw.caps.size(); ++i) {
        SimConfig c = cfg;
        c.depth_cap = sw.caps[i];
        Json r = estimate_record(o.seed, c, o.n, sw.estimates[i]);
        r["kind"] = "sweep";
        out.records.push_back(r);
      }
    }
  }
  out.summary = "sweep: " + std::to_string(out.records.size()) + " row(s)";
  return out;
}

Outcome cmd_compare(const Options& o) {
  Outcome out;
  const InitialDataSpec data(RadialProfile::parse(o.data));
  double worst = 0.0;
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      const SimConfig cfg = at(base_config(o), xi, t);
      const CompareReport rep = compare_thinned_minimal(cfg, data, o.n, o.seed, {workers(o), false});
      for (auto& r : compare_records(o.seed, cfg, o.n, rep)) out.records.push_back(r);
      worst = std::max(worst, rep.max_abs_z);
    }
  }
  out.summary = "compare: max |z| = " + format_number(worst);
  return out;
}

Outcome cmd_majorize(const Options& o) {
  Outcome out;
  const InitialDataSpec data(RadialProfile::parse(o.data));
  std::size_t total = 0, bad = 0;
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      const SimConfig cfg = at(base_config(o), xi, t);
      const MajorizeReport rep = majorize_audit(cfg, data, o.n, o.seed, workers(o));
      out.records.push_back(majorize_record(o.seed, cfg, rep));
      total += rep.n;
      bad += rep.violations;
    }
  }
  out.violation = bad > 0;
  out.summary = "violations: " + std::to_string(bad) + "/" + std::to_string(total);
  return out;
}

Outcome cmd_generalized(const Options& o) {
  Outcome out;
  const InitialDataSpec data(RadialProfile::parse(o.data));
  const std::vector<std::string> fs =
      o.transforms.empty() ? std::vector<std::string>{"pow:2", "pow:3", "x2log"} : o.transforms;
  std::size_t bad = 0;
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      SimConfig cfg = at(base_config(o), xi, t);
      cfg.equation = Equation::FMS;
      for (const auto& s : fs) {
        const ScalarTransform f = ScalarTransform::parse(s);
        const JensenReport rep = jensen_order_check(cfg, data, f, o.n, o.seed, workers(o));
        out.records.push_back(generalized_record(o.seed, cfg, f, rep));
        bad += rep.pathwise_violations;
      }
    }
  }
  out.violation = bad > 0;
  out.summary = "generalized: pathwise violations " + std::to_string(bad);
  return out;
}

Outcome cmd_holder(const Options& o) {
  Outcome out;
  const RadialProfile y = RadialProfile::parse(o.y_profile);
  std::vector<RadialProfile> xs;
  for (const auto& s : o.x_profiles.empty() ? std::vector<std::string>{"exp:1,2", "constant:1"} : o.x_profiles)
    xs.push_back(RadialProfile::parse(s));
  const std::vector<double> alphas = o.alphas.empty() ? std::vector<double>(xs.size(), 1.0 / xs.size()) : o.alphas;
  std::size_t bad = 0;
  for (const auto& xi : frequencies(o)) {
    for (double t : horizons(o)) {
      SimConfig cfg = at(base_config(o), xi, t);
      cfg.equation = Equation::FMS;
      const HolderReport rep = holder_audit(cfg, y, xs, alphas, o.n, o.seed, workers(o));
      out.records.push_back(holder_record(o.seed, cfg, rep));
      bad += rep.pathwise_violations;
    }
  }
  out.violation = bad > 0;
  out.summary = "holder: pathwise violations " + std::to_string(bad);
  return out;
}

Outcome cmd_jensen(const Options& o) {
  Outcome out;
  const KernelSpec k = make_kernel(o.kernel);
  const RadialProfile psi0 = RadialProfile::parse(o.data);
  const int iters = o.iterations < 0 ? 12 : o.iterations;
  std::size_t bad = 0;
  for (const auto& s : o.transforms.empty() ? std::vector<std::string>{"pow:2"} : o.transforms) {
    const ScalarTransform f = ScalarTransform::parse(s);
    const JensenIterateReport rep = jensen_iterate_check(k, psi0, f, o.grid, iters, o.tolerance);
    out.records.push_back(jensen_iterate_record(to_string(k.family()), f, rep));
    bad += rep.violations;
  }
  out.violation = bad > 0;
  out.summary = "jensen: violating nodes " + std::to_string(bad);
  return out;
}

Outcome cmd_picard(const Options& o) {
  Outcome out;
  const KernelSpec k = make_kernel(o.kernel);
  const RadialProfile psi0 = RadialProfile::parse(o.data);
  const int iters = o.iterations < 0 ? 64 : o.iterations;
  PicardOptions po;
  po.stop_tolerance = o.stop_tolerance;
  po.keep_iterates = o.dump == "all";
  if (o.dump != "all" && o.dump != "last" && o.dump != "none") throw DomainError("dump: expected all, last or none");

  std::optional<GridComparison> cmp;
  PicardResult res;
  if (!o.at.empty()) {
    cmp = run_picard_with_tolerance(k, psi0, o.grid, iters, po);
    res = cmp->fine;
  } else {
    res = run_picard(k, psi0, o.grid, iters, po);
  }

  if (o.dump != "none") {
    std::vector<int> which;
    if (o.dump == "all")
      for (int n = 0; n < static_cast<int>(res.iterates.size()); ++n) which.push_back(n);
    Json grid = picard_grid_records(res, o.dump == "all" ? which : std::vector<int>{0});
    if (o.dump == "last")
      for (auto& r : grid) r["iterate"] = res.iterations;
    for (auto& r : grid) out.records.push_back(r);
  }
  for (const auto& s : o.at) {
    const auto rt = split_numbers(s);
    if (rt.size() != 2) throw DomainError("at: expected r,t");
    Json r = record("point");
    r["r"] = rt[0];
    r["t"] = rt[1];
    r["iterate"] = res.iterations;
    r["value"] = num(cmp->value(rt[0], rt[1]));
    r["grid_tolerance"] = num(cmp->tolerance(rt[0], rt[1]));
    out.records.push_back(r);
  }
  out.extra["convergence"] = picard_log(res);
  if (!o.log_path.empty()) {
    std::ofstream f(o.log_path, std::ios::binary);
    if (!f) throw IoError("cannot open log file " + o.log_path);
    write_json(picard_log(res), f);
    if (!f) throw IoError("write failed: " + o.log_path);
  }
  out.summary = "picard: " + std::to_string(res.iterations) + " iteration(s), last delta " +
                (res.deltas.empty() ? std::string("-") : format_number(res.deltas.back())) +
                (res.diverged ? ", diverged: " + res.diagnostic : "");
  return out;
}

Outcome cmd_norms(const Options& o, std::ostream& err) {
  Outcome out;
  HerzParams prm;
  prm.p = parse_extended(o.herz_p, "p");
  prm.q = parse_extended(o.herz_q, "q");
  prm.dim = o.dim;
  prm.k_min = o.k_min;
  prm.k_max = o.k_max;
  prm.alpha = o.alpha == "critical" ? HerzParams::scale_critical(prm.p, prm.q, prm.dim).alpha
                                     : parse_extended(o.alpha, "alpha");
  const RadialProfile g = RadialProfile::parse(o.profile);
  const RadialFunction f = o.normalize ? normalize_data(g, make_kernel(o.kernel, o.dim)) : RadialFunction::from_profile(g);
  const HerzReport rep = herz_norm(f, prm);
  out.records = herz_records(rep);
  out.extra["herz"] = herz_json(rep);
  if (!std::isinf(prm.p)) {
    Json r = record("threshold");
    r["delta"] = o.delta;
    r["value"] = smallness_threshold(prm.p, prm.dim, o.delta);
    out.records.push_back(r);
    if (o.delta == kDefaultSmallnessDelta)
      err << "warning: delta is a free smallness constant with no known numeric value; using the default "
          << format_number(o.delta) << "\n";
  }
  out.summary = "norm: " + format_number(rep.norm) + (rep.divergent ? " (divergent)" : "");
  return out;
}

Outcome cmd_validate_kernel(const Options& o) {
  Outcome out;
  const KernelSpec k = make_kernel(o.kernel);
  const std::vector<double> radii = o.radii.empty() ? std::vector<double>{0.5, 1.0, 2.0} : o.radii;
  bool all_ok = true;
  const std::string name = to_string(k.family());
  for (double r : radii) {
    const ConvolutionCheck c = check_convolution_identity(k, Frequency{r, 0.0, 0.0});
    out.records.push_back(convolution_record(name, r, c));
    if (!o.skip_gof) {
      const auto variant = o.biased ? SamplerVariant::Biased : SamplerVariant::Exact;
      const GoFReport g = validate_sampler(k, Frequency{r, 0.0, 0.0}, o.n, BinSpec{o.u_bins, o.t_bins}, o.seed, variant);
      out.records.push_back(gof_record(name, r, o.seed, o.biased ? "biased" : "exact", g));
      all_ok = all_ok && g.pass;
    }
  }
  out.violation = !all_ok;
  out.summary = std::string("validate-kernel: sampler ") + (o.skip_gof ? "not tested" : all_ok ? "passes" : "FAILS");
  return out;
}

void add_common(CLI::App& app, Options& o) {
  app.add_option("--kernel", o.kernel, "scale-invariant | bessel")->capture_default_str();
  app.add_option("--equation", o.equation, "fms | fns")->capture_default_str();
  app.add_option("--mode", o.mode, "minimal | thinned")->capture_default_str();
  app.add_option("--thin-p", o.p, "branching probability of the thinned recursion")->capture_default_str();
  app.add_option("--data", o.data, "initial data profile, e.g. constant:1, exp:1,1, annulus:1,1,2")
      ->capture_default_str();
  app.add_option("--xi", o.xi, "frequency x,y,z (repeatable)");
  app.add_option("--t", o.t, "horizon(s)")->delimiter(',');
  app.add_option("--N", o.n, "number of trees or samples")->capture_default_str();
  app.add_option("--depth-cap", o.depth_cap, "depth cap")->capture_default_str();
  app.add_option("--seed", o.seed, "master seed")->envname("CASCADE_NS_SEED")->capture_default_str();
  app.add_option("--workers", o.workers, "worker threads (0: available parallelism)")->capture_default_str();
  app.add_option("--output", o.output, "output file (default stdout)");
  app.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_flag("--strict", o.strict, "treat every invariant failure as a hard error");
}

void add_grid(CLI::App& app, Options& o) {
  app.add_option("--r-min", o.grid.r_min)->capture_default_str();
  app.add_option("--r-max", o.grid.r_max)->capture_default_str();
  app.add_option("--r-count", o.grid.r_count)->capture_default_str();
  app.add_option("--t-max", o.grid.t_max)->capture_default_str();
  app.add_option("--t-count", o.grid.t_count)->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Stochastic cascade solutions of the Fourier-space Navier-Stokes equation and its scalar majorizing model"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1);
  add_common(app, o);

  auto* est = app.add_subcommand("estimate", "Monte Carlo estimate of the cascade solution")->fallthrough();
  est->add_flag("--mom", o.median_of_means, "also report the median-of-means estimate");

  auto* expl = app.add_subcommand("explosion", "P(zeta_n > t) over caps and horizons on shared trees")->fallthrough();
  expl->add_option("--caps", o.caps, "depth caps")->delimiter(',');
  expl->add_option("--lambda", o.lambda, "run the scaling check with this factor (0: skip)");
  expl->add_flag("--independent", o.independent, "independent seeds for the two scaling runs");

  auto* sweep = app.add_subcommand("sweep", "estimates over depth caps")->fallthrough();
  sweep->add_option("--caps", o.caps, "depth caps")->delimiter(',');
  sweep->add_flag("--mom", o.median_of_means);

  auto* cmp = app.add_subcommand("compare", "minimal vs thinned cascade estimates")->fallthrough();

  auto* audit = app.add_subcommand("audit", "pathwise audits")->fallthrough()->require_subcommand(1);
  auto* a_maj = audit->add_subcommand("majorize", "|X| <= Y on coupled trees")->fallthrough();
  auto* a_gen = audit->add_subcommand("generalized", "f(Y) <= Z on shared trees")->fallthrough();
  a_gen->add_option("--f", o.transforms, "transforms: x, pow:a, x2log")->delimiter(',');
  auto* a_hol = audit->add_subcommand("holder", "Y <= prod X_j^a_j on shared trees")->fallthrough();
  a_hol->add_option("--y", o.y_profile, "profile of Y")->capture_default_str();
  a_hol->add_option("--x", o.x_profiles, "profiles of X_j (repeatable)");
  a_hol->add_option("--alphas", o.alphas, "exponents a_j")->delimiter(',');
  auto* a_jen = audit->add_subcommand("jensen", "ordering of Picard iterates phi^(n) >= f(psi^(n))")->fallthrough();
  a_jen->add_option("--f", o.transforms, "transforms")->delimiter(',');
  a_jen->add_option("--iterations", o.iterations, "iterates to check (default 12)");
  a_jen->add_option("--tolerance", o.tolerance)->capture_default_str();
  add_grid(*a_jen, o);

  auto* pic = app.add_subcommand("picard", "deterministic Picard iteration of the radial scalar equation")->fallthrough();
  pic->add_option("--iterations", o.iterations, "iterations (default 64)");
  pic->add_option("--stop-tol", o.stop_tolerance, "stop when the sup change falls below this");
  pic->add_option("--dump", o.dump, "grid dump: last | all | none")->capture_default_str();
  pic->add_option("--at", o.at, "r,t point to report with its grid tolerance (repeatable)");
  pic->add_option("--log", o.log_path, "write the convergence log as JSON");
  add_grid(*pic, o);

  auto* norms = app.add_subcommand("norms", "Herz norms of radial data")->fallthrough();
  norms->add_option("--profile", o.profile)->capture_default_str();
  norms->add_option("--alpha", o.alpha, "weight exponent or 'critical'")->capture_default_str();
  norms->add_option("--p", o.herz_p, "p in [1, inf]")->capture_default_str();
  norms->add_option("--q", o.herz_q, "q in [1, inf]")->capture_default_str();
  norms->add_option("--dim", o.dim)->capture_default_str();
  norms->add_option("--k-min", o.k_min)->capture_default_str();
  norms->add_option("--k-max", o.k_max)->capture_default_str();
  norms->add_option("--delta", o.delta, "smallness constant for the threshold")->capture_default_str();
  norms->add_flag("--normalize", o.normalize, "take the norm of c0 v0 / h instead of v0");

  auto* vk = app.add_subcommand("validate-kernel", "convolution identity and sampler goodness of fit")->fallthrough();
  vk->add_option("--r", o.radii, "radii")->delimiter(',');
  vk->add_option("--u-bins", o.u_bins)->capture_default_str();
  vk->add_option("--t-bins", o.t_bins)->capture_default_str();
  vk->add_flag("--biased", o.biased, "use the biased control sampler");
  vk->add_flag("--skip-gof", o.skip_gof);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Outcome res;
  std::string command;
  try {
    if (est->parsed()) command = "estimate", res = cmd_estimate(o);
    else if (expl->parsed()) command = "explosion", res = cmd_explosion(o);
    else if (sweep->parsed()) command = "sweep", res = cmd_sweep(o);
    else if (cmp->parsed()) command = "compare", res = cmd_compare(o);
    else if (a_maj->parsed()) command = "audit majorize", res = cmd_majorize(o);
    else if (a_gen->parsed()) command = "audit generalized", res = cmd_generalized(o);
    else if (a_hol->parsed()) command = "audit holder", res = cmd_holder(o);
    else if (a_jen->parsed()) command = "audit jensen", res = cmd_jensen(o);
    else if (pic->parsed()) command = "picard", res = cmd_picard(o);
    else if (norms->parsed()) command = "norms", res = cmd_norms(o, err);
    else if (vk->parsed()) command = "validate-kernel", res = cmd_validate_kernel(o);

    std::ostringstream body;
    if (o.format == "json") {
      Json doc = document(command, res.records);
      for (const auto& [key, v] : res.extra.items()) doc[key] = v;
      write_json(doc, body);
    } else {
      write_csv(res.records, body);
    }
    if (o.output.empty()) {
      out << body.str();
    } else {
      std::ofstream f(o.output, std::ios::binary);
      if (!f) throw IoError("cannot open output file " + o.output);
      f << body.str();
      f.flush();
      if (!f) throw IoError("write failed: " + o.output);
    }
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  err << res.summary << "\n";
  const bool always_fatal = command == "audit majorize";
  if (res.violation && (always_fatal || o.strict)) return kExitViolation;
  return kExitOk;
}

}  // namespace cascade::cli
