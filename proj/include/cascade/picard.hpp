// SPDX-License-Identifier: Apache-2.0
//
// Deterministic Picard iteration for the radial scalar equation in d = 3,
//   psi(r, t) = e^{-t r^2} psi0(r) + int_0^t r^2 e^{-s r^2} I(r; psi(., t - s)) ds,
// with I(r; f, g) = int f(|eta|) g(|xi - eta|) H(eta | xi) d eta, |xi| = r.
//
// Radial functions are piecewise linear in ln r on a log-spaced grid, held
// constant below the first node and equal to an explicit tail value above
// the last. The inner w-integral is done exactly for that interpolant, so I
// becomes a fixed bilinear form in the node values, precomputed once per
// grid. The time integral uses exact exponential weights for I piecewise
// linear in t.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/initial_data.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

/// Relative accuracy target of the u-quadrature, used as the tolerance of
/// fixed-point residual checks.
inline constexpr double kQuadratureTolerance = 1e-6;
/// Values above this abort the iteration as a likely infinite solution.
inline constexpr double kDivergenceGuard = 1e100;

struct RadialGridSpec {
  double r_min = 1e-2;
  double r_max = 1e2;
  std::size_t r_count = 256;
  double t_max = 1.0;
  std::size_t t_count = 128;  // t_j = j t_max / t_count, j = 1..t_count, plus t = 0

  void validate() const;
  [[nodiscard]] std::vector<double> r_nodes() const;
  [[nodiscard]] std::vector<double> t_nodes() const;
  /// Half the nodes in each direction; used for the grid tolerance.
  [[nodiscard]] RadialGridSpec coarse() const;
};

/// Values psi(r_i, t_j), row-major in r, with t_0 = 0.
struct RadialGrid {
  std::vector<double> r;
  std::vector<double> t;
  std::vector<double> values;

  RadialGrid() = default;
  explicit RadialGrid(const RadialGridSpec& spec);

  double& at(std::size_t i, std::size_t j) { return values[i * t.size() + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * t.size() + j]; }
  /// Column j as a radial slice.
  [[nodiscard]] std::vector<double> column(std::size_t j) const;
  /// Bilinear in (ln r, t), constant outside the r range. t must lie in
  /// [0, t_max].
  [[nodiscard]] double interpolate(double r, double t) const;
};

/// A radial function on a grid. `tail` is the value used beyond the last
/// node and must be given.
struct RadialSlice {
  std::vector<double> r;
  std::vector<double> values;
  std::optional<double> tail;
};

/// Precomputed quadrature plan for I(r; f, g) at fixed evaluation radii.
class BranchingOperator {
 public:
  BranchingOperator(const KernelSpec& k, std::vector<double> r_nodes, std::vector<double> eval_r);
  /// Evaluation radii equal to the nodes.
  BranchingOperator(const KernelSpec& k, std::vector<double> r_nodes);

  [[nodiscard]] std::size_t node_count() const { return r_.size(); }
  [[nodiscard]] const std::vector<double>& eval_radii() const { return eval_r_; }

  /// out[i] = I(eval_r[i]; f, g), where f and g hold node values followed by
  /// one tail value (size node_count() + 1).
  void apply(const std::vector<double>& f, const std::vector<double>& g, std::vector<double>& out) const;
  /// Several radial functions at once: f and g are (node_count() + 1) x nc
  /// row-major, out is eval_radii().size() x nc.
  void apply_columns(const double* f, const double* g, std::size_t nc, double* out) const;

 private:
  void build_point_tables();
  void node_cumulative(const double* g, std::size_t nc, std::vector<double>& gn) const;

  KernelFamily family_;
  std::vector<double> r_;
  std::vector<double> eval_r_;
  double h_ = 0.0;  // log spacing

  // Bessel: exact per-segment weights of g_k and g_{k+1} in int e^{-w} g dw.
  std::vector<double> seg_a_, seg_b_;

  // Quadrature points, grouped by evaluation radius.
  std::vector<std::size_t> start_;
  std::vector<double> w_, lam_;
  std::vector<std::int32_t> a_;
  std::vector<std::int32_t> gp_, ap_, gm_, am_;
  std::vector<double> alp_, bep_, alm_, bem_;
  std::vector<double> tail_coef_;
};

/// I(r; psi, psi) for a single radius.
double branching_integral(const KernelSpec& k, const RadialSlice& psi, double r);

struct PicardOptions {
  /// Stop once the sup-norm change falls to this value (0: run all iterations).
  double stop_tolerance = 0.0;
  bool keep_iterates = true;
};

struct PicardResult {
  std::vector<RadialGrid> iterates;  // iterates[n] = psi^(n); only the last if not kept
  std::vector<double> deltas;        // deltas[n] = sup |psi^(n+1) - psi^(n)|
  int iterations = 0;
  bool diverged = false;
  bool converged = false;
  std::string diagnostic;

  [[nodiscard]] const RadialGrid& last() const { return iterates.back(); }
};

/// psi^(0) = 0 and psi^(n+1) = U(psi0) + B(psi^(n), psi^(n)), for n up to
/// `iterations`.
PicardResult run_picard(const KernelSpec& k, const RadialProfile& psi0, const RadialGridSpec& spec, int iterations,
                        const PicardOptions& opt = {});

/// One application of the right-hand side: U(psi0) + B(f, g).
RadialGrid picard_step(const BranchingOperator& op, const RadialGridSpec& spec, const std::vector<double>& psi0_nodes,
                       const RadialGrid& f, const RadialGrid& g);

/// sup over grid nodes of |psi - U(psi0) - B(psi, psi)|.
double residual(const KernelSpec& k, const RadialGridSpec& spec, const RadialGrid& psi, const RadialProfile& psi0);

struct JensenIterateReport {
  int iterations = 0;
  bool pass = false;
  std::size_t violations = 0;
  double worst_gap = 0.0;  // max of f(psi^(n)) - phi^(n) over all nodes and n
  int worst_iterate = 0;
  double worst_r = 0.0;
  double worst_t = 0.0;
  double tolerance = 0.0;
};

/// Runs psi^(n) and the mixed recursion phi^(n+1) = U(f(psi0)) +
/// B(phi^(n), psi^(n)) side by side and checks phi^(n) >= f(psi^(n)) - tol
/// at every node for n = 0..iterations.
JensenIterateReport jensen_iterate_check(const KernelSpec& k, const RadialProfile& psi0, const ScalarTransform& f,
                                         const RadialGridSpec& spec, int iterations,
                                         double tolerance = kQuadratureTolerance);

/// |fine - coarse| at (r, t), the coarse grid being spec.coarse() run with
/// the same number of iterations.
struct GridComparison {
  PicardResult fine;
  PicardResult coarse;
  [[nodiscard]] double value(double r, double t) const { return fine.last().interpolate(r, t); }
  [[nodiscard]] double tolerance(double r, double t) const;
};

GridComparison run_picard_with_tolerance(const KernelSpec& k, const RadialProfile& psi0, const RadialGridSpec& spec,
                                         int iterations, const PicardOptions& opt = {});

}  // namespace cascade
