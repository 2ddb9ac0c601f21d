// SPDX-License-Identifier: Apache-2.0
#include "cascade/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace cascade {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json num(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

Json record(const std::string& kind) {
  Json r = Json::object();
  r["kind"] = kind;
  return r;
}

namespace {

std::string csv_cell(const Json& v) {
  switch (v.type()) {
    case Json::value_t::null:
      return "";
    case Json::value_t::boolean:
      return v.get<bool>() ? "true" : "false";
    case Json::value_t::number_integer:
      return std::to_string(v.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return std::to_string(v.get<std::uint64_t>());
    case Json::value_t::number_float:
      return format_number(v.get<double>());
    case Json::value_t::string: {
      const auto s = v.get<std::string>();
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    }
    default:
      return csv_cell(Json(v.dump()));
  }
}

std::string xi_key(std::size_t i, std::size_t dim) {
  static const char* xyz[] = {"xi_x", "xi_y", "xi_z"};
  return dim == 3 ? xyz[i] : "xi_" + std::to_string(i + 1);
}

void put_xi(Json& r, const RealVec& xi) {
  for (std::size_t i = 0; i < xi.dim(); ++i) r[xi_key(i, xi.dim())] = xi[i];
}

void put_config(Json& r, std::uint64_t seed, const SimConfig& cfg) {
  r["seed"] = seed;
  r["kernel"] = to_string(cfg.kernel.family());
  r["mode"] = to_string(cfg.mode);
  r["equation"] = to_string(cfg.equation);
  put_xi(r, cfg.root.coords());
  r["t"] = cfg.horizon;
  r["depth_cap"] = cfg.depth_cap;
}

}  // namespace

void write_csv(const Json& records, std::ostream& os) {
  std::vector<std::string> cols;
  for (const auto& rec : records)
    for (const auto& [k, v] : rec.items())
      if (k != "kind" && std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  os << kSchemaVersion;
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  for (const auto& rec : records) {
    os << csv_cell(rec.value("kind", Json()));
    for (const auto& c : cols) os << ',' << (rec.contains(c) ? csv_cell(rec[c]) : "");
    os << '\n';
  }
}

Json document(const std::string& command, const Json& records) {
  Json d = Json::object();
  d["schema"] = kSchemaVersion;
  d["command"] = command;
  d["records"] = records;
  return d;
}

void write_json(const Json& doc, std::ostream& os) { os << doc.dump(2) << '\n'; }

Json estimate_record(std::uint64_t seed, const SimConfig& cfg, std::size_t n, const EstimateReport& rep) {
  Json r = record("estimate");
  put_config(r, seed, cfg);
  r["N"] = n;
  if (rep.equation == Equation::FMS) {
    r["mean"] = num(rep.mean.at(0));
    r["stderr"] = num(rep.std_error.at(0));
  } else {
    const std::size_t d = rep.dim;
    for (std::size_t i = 0; i < d; ++i) r["mean_re_" + std::to_string(i + 1)] = num(rep.mean[i]);
    for (std::size_t i = 0; i < d; ++i) r["mean_im_" + std::to_string(i + 1)] = num(rep.mean[d + i]);
    for (std::size_t i = 0; i < 2 * d; ++i) r["stderr_" + std::to_string(i + 1)] = num(rep.std_error[i]);
  }
  r["completed_frac"] = rep.completed_fraction;
  r["capped_frac"] = rep.capped_fraction;
  r["thinned_zero_frac"] = rep.thinned_zero_fraction;
  r["stderr_norm"] = num(rep.std_error_norm);
  r["max_excess_kurtosis"] = num(rep.max_excess_kurtosis);
  r["kurtosis_flag"] = rep.kurtosis_flag;
  for (std::size_t i = 0; i < rep.median_of_means.size(); ++i)
    r["mom_" + std::to_string(i + 1)] = num(rep.median_of_means[i]);
  if (cfg.mode == Mode::Thinned) r["p"] = cfg.p;
  return r;
}

Json compare_records(std::uint64_t seed, const SimConfig& cfg, std::size_t n, const CompareReport& rep) {
  Json out = Json::array();
  for (std::size_t i = 0; i < rep.z.size(); ++i) {
    Json r = record("compare");
    put_config(r, seed, cfg);
    r["mode"] = "minimal-vs-thinned";
    r["p"] = cfg.p;
    r["N"] = n;
    r["component"] = i + 1;
    r["minimal_mean"] = num(rep.minimal.mean[i]);
    r["minimal_stderr"] = num(rep.minimal.std_error[i]);
    r["thinned_mean"] = num(rep.thinned.mean[i]);
    r["thinned_stderr"] = num(rep.thinned.std_error[i]);
    r["z"] = num(rep.z[i]);
    out.push_back(r);
  }
  return out;
}

Json explosion_records(std::uint64_t seed, const KernelSpec& kernel, const RealVec& xi, const ExplosionTable& tab) {
  Json out = Json::array();
  for (std::size_t ci = 0; ci < tab.caps.size(); ++ci) {
    for (std::size_t ti = 0; ti < tab.horizons.size(); ++ti) {
      Json r = record("explosion");
      r["seed"] = seed;
      r["kernel"] = to_string(kernel.family());
      put_xi(r, xi);
      r["t"] = tab.horizons[ti];
      r["depth_cap"] = tab.caps[ci];
      r["N"] = tab.n;
      r["completed"] = tab.completed[ci][ti];
      r["p_hat"] = tab.p_hat(ci, ti);
      r["stderr"] = tab.std_error(ci, ti);
      out.push_back(r);
    }
  }
  return out;
}

Json scaling_record(std::uint64_t seed, const std::string& kernel, const RealVec& xi, double t, std::size_t n,
                    int depth_cap, const ScalingReport& rep) {
  Json r = record("scaling");
  r["seed"] = seed;
  r["kernel"] = kernel;
  put_xi(r, xi);
  r["t"] = t;
  r["depth_cap"] = depth_cap;
  r["N"] = n;
  r["lambda"] = rep.lambda;
  r["p_scaled_frequency"] = rep.p_scaled_frequency;
  r["se_scaled_frequency"] = rep.se_scaled_frequency;
  r["p_scaled_time"] = rep.p_scaled_time;
  r["se_scaled_time"] = rep.se_scaled_time;
  r["z"] = num(rep.z);
  return r;
}

Json majorize_record(std::uint64_t seed, const SimConfig& cfg, const MajorizeReport& rep) {
  Json r = record("majorize");
  put_config(r, seed, cfg);
  r["N"] = rep.n;
  r["violations"] = rep.violations;
  r["max_ratio"] = num(rep.max_ratio);
  return r;
}

Json generalized_record(std::uint64_t seed, const SimConfig& cfg, const ScalarTransform& f, const JensenReport& rep) {
  Json r = record("generalized");
  put_config(r, seed, cfg);
  r["f"] = f.to_string();
  r["N"] = rep.n;
  r["pathwise_violations"] = rep.pathwise_violations;
  r["max_log_gap"] = num(rep.max_log_gap);
  r["max_equality_deviation"] = num(rep.max_equality_deviation);
  r["mean_y"] = num(rep.mean_y);
  r["se_y"] = num(rep.se_y);
  r["f_of_mean_y"] = num(rep.f_of_mean_y);
  r["se_f_of_mean_y"] = num(rep.se_f_of_mean_y);
  r["mean_z"] = num(rep.mean_z);
  r["se_z"] = num(rep.se_z);
  r["estimator_ok"] = rep.estimator_ok;
  return r;
}

Json holder_record(std::uint64_t seed, const SimConfig& cfg, const HolderReport& rep) {
  Json r = record("holder");
  put_config(r, seed, cfg);
  r["N"] = rep.n;
  r["pathwise_violations"] = rep.pathwise_violations;
  r["max_equality_deviation"] = num(rep.max_equality_deviation);
  r["mean_y"] = num(rep.mean_y);
  r["se_y"] = num(rep.se_y);
  for (std::size_t j = 0; j < rep.mean_x.size(); ++j) {
    r["mean_x" + std::to_string(j + 1)] = num(rep.mean_x[j]);
    r["se_x" + std::to_string(j + 1)] = num(rep.se_x[j]);
  }
  r["product_bound"] = num(rep.product_bound);
  r["bound_se"] = num(rep.bound_se);
  r["estimator_ok"] = rep.estimator_ok;
  return r;
}

Json jensen_iterate_record(const std::string& kernel, const ScalarTransform& f, const JensenIterateReport& rep) {
  Json r = record("jensen");
  r["kernel"] = kernel;
  r["f"] = f.to_string();
  r["iterations"] = rep.iterations;
  r["tolerance"] = rep.tolerance;
  r["violations"] = rep.violations;
  r["worst_gap"] = num(rep.worst_gap);
  r["worst_iterate"] = rep.worst_iterate;
  r["worst_r"] = rep.worst_r;
  r["worst_t"] = rep.worst_t;
  r["pass"] = rep.pass;
  return r;
}

Json picard_grid_records(const PicardResult& res, const std::vector<int>& iterates) {
  Json out = Json::array();
  for (int n : iterates) {
    const RadialGrid& g = res.iterates.at(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.r.size(); ++i) {
      for (std::size_t j = 0; j < g.t.size(); ++j) {
        Json r = record("grid");
        r["r"] = g.r[i];
        r["t"] = g.t[j];
        r["iterate"] = n;
        r["value"] = num(g.at(i, j));
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

Json picard_log(const PicardResult& res) {
  Json log = Json::object();
  log["iterations"] = res.iterations;
  log["converged"] = res.converged;
  log["diverged"] = res.diverged;
  log["diagnostic"] = res.diagnostic;
  Json d = Json::array();
  for (double x : res.deltas) d.push_back(num(x));
  log["deltas"] = d;
  return log;
}

Json herz_records(const HerzReport& rep) {
  Json out = Json::array();
  for (const auto& s : rep.shells) {
    Json r = record("shell");
    r["k"] = s.k;
    r["value"] = num(s.value);
    out.push_back(r);
  }
  Json n = record("norm");
  n["value"] = num(rep.norm);
  n["tail_bound"] = num(rep.tail_bound);
  n["divergent"] = rep.divergent;
  out.push_back(n);
  return out;
}

Json herz_json(const HerzReport& rep) {
  Json j = Json::object();
  Json p = Json::object();
  p["alpha"] = rep.params.alpha;
  p["p"] = num(rep.params.p);
  p["q"] = num(rep.params.q);
  p["dim"] = rep.params.dim;
  p["k_min"] = rep.params.k_min;
  p["k_max"] = rep.params.k_max;
  j["params"] = p;
  Json shells = Json::array();
  for (const auto& s : rep.shells) shells.push_back(Json{{"k", s.k}, {"value", num(s.value)}});
  j["per_shell_values"] = shells;
  j["norm"] = num(rep.norm);
  j["tail_bound"] = num(rep.tail_bound);
  j["divergent"] = rep.divergent;
  j["divergent_shells"] = rep.divergent_shells;
  return j;
}

Json convolution_record(const std::string& kernel, double r, const ConvolutionCheck& c) {
  Json o = record("convolution");
  o["kernel"] = kernel;
  o["r"] = r;
  o["convolution"] = num(c.convolution);
  o["target"] = num(c.target);
  o["relative_error"] = num(c.relative_error);
  o["error_estimate"] = num(c.error_estimate);
  o["converged"] = c.converged;
  return o;
}

Json gof_record(const std::string& kernel, double r, std::uint64_t seed, const std::string& variant,
                const GoFReport& rep) {
  Json o = record("gof");
  o["kernel"] = kernel;
  o["r"] = r;
  o["seed"] = seed;
  o["variant"] = variant;
  o["N"] = rep.n;
  o["bins"] = rep.bins;
  o["requested_bins"] = rep.requested_bins;
  o["chi2"] = num(rep.chi2);
  o["dof"] = rep.dof;
  o["pvalue"] = num(rep.pvalue);
  o["expected_mass"] = num(rep.expected_mass);
  o["pass"] = rep.pass;
  o["underpowered"] = rep.underpowered;
  o["widened"] = rep.widened;
  return o;
}

}  // namespace cascade
