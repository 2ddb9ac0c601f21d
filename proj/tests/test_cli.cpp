// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/cli.hpp"
#include "cascade/reports.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cascade-ns");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) v.push_back(cell);
  return v;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) rows.push_back(split(line));
  return rows;
}

double column(const std::vector<std::vector<std::string>>& t, std::size_t row, const std::string& name) {
  for (std::size_t j = 0; j < t[0].size(); ++j)
    if (t[0][j] == name) return std::stod(t[row][j]);
  FAIL("missing column " << name);
  return 0.0;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "cascade_ns_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("estimate: unit FMS data reports mean equal to the completed fraction") {
  const Run r = invoke({"estimate", "--kernel", "scale-invariant", "--equation", "fms", "--data", "constant:1", "--xi",
                     "1,0,0", "--t", "1", "--N", "20000", "--workers", "1"});
  REQUIRE(r.code == cli::kExitOk);
  const auto t = csv(r.out);
  REQUIRE(t.size() == 2);
  CHECK(t[0][0] == kSchemaVersion);
  CHECK(t[1][0] == "estimate");
  CHECK(column(t, 1, "mean") == column(t, 1, "completed_frac"));
  CHECK(r.err.rfind("estimate:", 0) == 0);
}

TEST_CASE("FNS estimate rows carry the per-component columns") {
  const Run r = invoke({"estimate", "--equation", "fns", "--data", "constant:0.5", "--xi", "0,1,0", "--t", "0.5,1", "--N",
                     "500"});
  REQUIRE(r.code == cli::kExitOk);
  const auto t = csv(r.out);
  REQUIRE(t.size() == 3);
  for (const char* c : {"mean_re_1", "mean_im_3", "stderr_1", "stderr_6", "completed_frac", "capped_frac",
                        "thinned_zero_frac"})
    CHECK(std::find(t[0].begin(), t[0].end(), c) != t[0].end());
}

TEST_CASE("audit majorize prints the violation count") {
  const Run r = invoke({"audit", "majorize", "--data", "constant:0.5", "--N", "2000"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.err.find("violations: 0/2000") != std::string::npos);
}

TEST_CASE("norms of the unit annulus") {
  const Run r = invoke({"norms", "--profile", "annulus:1,1,2", "--alpha", "-1", "--p", "1", "--q", "1"});
  REQUIRE(r.code == cli::kExitOk);
  const auto t = csv(r.out);
  bool found = false;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i][0] == "norm") {
      CHECK(column(t, i, "value") == doctest::Approx(6.0 * std::numbers::pi).epsilon(1e-10));
      found = true;
    }
  CHECK(found);
  const Run j = invoke({"norms", "--profile", "annulus:1,1,2", "--format", "json"});
  REQUIRE(j.code == cli::kExitOk);
  const Json doc = Json::parse(j.out);
  CHECK(doc["schema"] == kSchemaVersion);
  for (const char* key : {"params", "per_shell_values", "norm", "tail_bound", "divergent"}) CHECK(doc["herz"].contains(key));
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"estimate", "--no-such-flag"}).code == cli::kExitUsage);
  CHECK(invoke({"estimate", "--xi", "0,0,0", "--N", "200"}).code == cli::kExitUsage);
  CHECK(invoke({"estimate", "--t", "-1", "--N", "200"}).code == cli::kExitUsage);
  CHECK(invoke({"estimate", "--kernel", "gaussian", "--N", "200"}).code == cli::kExitUsage);
  CHECK(invoke({"estimate", "--N", "200", "--output", "/nonexistent-dir/x.csv"}).code == cli::kExitIo);
  // A failing sampler check is reported, and becomes fatal only under --strict.
  const std::vector<std::string> biased{"validate-kernel", "--r", "1", "--N", "50000", "--biased"};
  CHECK(invoke(biased).code == cli::kExitOk);
  std::vector<std::string> strict = biased;
  strict.push_back("--strict");
  CHECK(invoke(strict).code == cli::kExitViolation);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("same seed and config give byte-identical files") {
  const fs::path d = scratch_dir();
  for (const char* fmt : {"csv", "json"}) {
    std::vector<std::string> args{"compare", "--data", "constant:0.5", "--N", "3000", "--seed", "17", "--workers", "1",
                                  "--format", fmt, "--output"};
    auto a = args, b = args;
    a.push_back((d / "a").string());
    b.push_back((d / "b").string());
    REQUIRE(invoke(a).code == cli::kExitOk);
    REQUIRE(invoke(b).code == cli::kExitOk);
    CHECK(slurp(d / "a") == slurp(d / "b"));
    CHECK_FALSE(slurp(d / "a").empty());
  }
  // Worker count does not change the artifact.
  const Run one = invoke({"estimate", "--N", "4000", "--seed", "5", "--workers", "1"});
  const Run many = invoke({"estimate", "--N", "4000", "--seed", "5", "--workers", "8"});
  CHECK(one.out == many.out);
}

TEST_CASE("seed from the environment and the config file; flags win") {
  ::setenv("CASCADE_NS_SEED", "77", 1);
  const Run env = invoke({"estimate", "--N", "200"});
  ::unsetenv("CASCADE_NS_SEED");
  REQUIRE(env.code == cli::kExitOk);
  CHECK(column(csv(env.out), 1, "seed") == 77.0);

  const fs::path cfg = scratch_dir() / "run.ini";
  std::ofstream(cfg) << "N=300\nseed=9\ndata=\"constant:0.5\"\n";
  const Run from_file = invoke({"estimate", "--config", cfg.string()});
  REQUIRE(from_file.code == cli::kExitOk);
  const auto t = csv(from_file.out);
  CHECK(column(t, 1, "seed") == 9.0);
  CHECK(column(t, 1, "N") == 300.0);
  const Run override = invoke({"estimate", "--config", cfg.string(), "--seed", "4"});
  CHECK(column(csv(override.out), 1, "seed") == 4.0);
}

TEST_CASE("picard point report and convergence log") {
  const fs::path log = scratch_dir() / "log.json";
  const Run r = invoke({"picard", "--r-count", "32", "--t-count", "8", "--iterations", "6", "--dump", "none", "--at", "1,1",
                     "--log", log.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto t = csv(r.out);
  REQUIRE(t.size() == 2);
  CHECK(t[1][0] == "point");
  const Json j = Json::parse(slurp(log));
  CHECK(j.contains("deltas"));
}

TEST_CASE("remaining commands run") {
  CHECK(invoke({"explosion", "--t", "0.5,1", "--caps", "2,4", "--N", "500"}).code == cli::kExitOk);
  CHECK(invoke({"sweep", "--caps", "1,2,4", "--N", "500"}).code == cli::kExitOk);
  CHECK(invoke({"sweep", "--equation", "fns", "--caps", "1,2", "--N", "500"}).code == cli::kExitOk);
  CHECK(invoke({"audit", "generalized", "--N", "500"}).code == cli::kExitOk);
  CHECK(invoke({"audit", "holder", "--N", "500"}).code == cli::kExitOk);
  CHECK(invoke({"audit", "jensen", "--r-count", "32", "--t-count", "8", "--iterations", "3"}).code == cli::kExitOk);
  CHECK(invoke({"validate-kernel", "--r", "1", "--skip-gof"}).code == cli::kExitOk);
  CHECK(invoke({"audit", "holder", "--N", "500", "--y", "exp:1,0.5", "--x", "exp:1,2", "--alphas", "0.5"}).code ==
        cli::kExitUsage);
}

TEST_CASE("number formatting and CSV layout") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e300) == "1e+300");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  for (double x : {1.0 / 3.0, 2.718281828459045, 1e-310, 123456789.125}) CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);

  Json recs = Json::array();
  Json a = record("alpha");
  a["x"] = 1;
  Json b = record("beta");
  b["y"] = "s";
  b["x"] = 2.5;
  recs.push_back(a);
  recs.push_back(b);
  std::ostringstream os;
  write_csv(recs, os);
  CHECK(os.str() == "cascade-ns/1,x,y\nalpha,1,\nbeta,2.5,s\n");
}
