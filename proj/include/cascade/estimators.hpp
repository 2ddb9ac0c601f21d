// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimators over independent cascade trees, and the comparative
// experiments built on them.
//
// Tree i always uses substream tree_key(seed, i). Workers take contiguous
// index ranges and write into per-index slots; the reduction runs on one
// thread in index order, so every report is bit-identical for any worker
// count.
#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "cascade/cascade.hpp"

namespace cascade {

/// Number of workers to use when the caller passes 0.
std::size_t default_workers();

/// Calls fn(i) for i in [0, n) on `workers` threads and returns the results
/// in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (workers == 0) workers = default_workers();
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

inline constexpr std::size_t kMinTrees = 100;
inline constexpr double kKurtosisFlag = 10.0;
inline constexpr std::size_t kMomBlocks = 16;

struct EstimateOptions {
  std::size_t workers = 1;
  bool median_of_means = false;
};

/// Sample statistics of real-valued per-tree components.
struct ComponentStats {
  std::vector<double> mean;
  std::vector<double> std_error;          // sd / sqrt(n)
  std::vector<double> excess_kurtosis;
  std::vector<double> median_of_means;    // empty unless requested
};

ComponentStats component_stats(const std::vector<std::vector<double>>& samples, bool median_of_means);

struct EstimateReport {
  Equation equation = Equation::FMS;
  Mode mode = Mode::Minimal;
  std::size_t dim = 3;
  /// FMS: one component. FNS: re_1..re_d then im_1..im_d.
  std::vector<double> mean;
  std::vector<double> std_error;
  double std_error_norm = 0.0;  // sqrt of the summed squared standard errors
  std::vector<double> median_of_means;
  std::size_t n = 0;
  double completed_fraction = 0.0;
  double capped_fraction = 0.0;
  double thinned_zero_fraction = 0.0;
  std::map<int, std::uint64_t> depth_histogram;  // height of completed trees
  bool kurtosis_flag = false;
  double max_excess_kurtosis = 0.0;

  [[nodiscard]] ComplexVec mean_vector() const;
  [[nodiscard]] double mean_scalar() const { return mean.at(0); }
};

/// Real components of one tree's value in the report's layout.
std::vector<double> value_components(const TreeOutcome& o);

/// Builds a report from per-tree outcomes in index order.
EstimateReport summarize(const SimConfig& cfg, const std::vector<TreeOutcome>& trees, bool median_of_means);

/// All per-tree outcomes for trees 0..N-1.
std::vector<TreeOutcome> simulate_batch(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                        std::uint64_t seed, std::size_t workers = 1);

/// Mean of N trees under cfg. Throws DomainError when every tree is capped.
EstimateReport estimate_solution(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                 std::uint64_t seed, const EstimateOptions& opt = {});

struct SweepReport {
  std::vector<int> caps;
  std::vector<EstimateReport> estimates;
};

/// Estimates at each depth cap on common random numbers. In minimal mode a
/// single pass at the largest cap suffices: a tree completes under cap n
/// exactly when it completes under the largest cap with height < n.
SweepReport depth_sweep(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                        const std::vector<int>& caps, std::uint64_t seed, const EstimateOptions& opt = {});

struct ExplosionTable {
  std::vector<int> caps;                        // strictly increasing
  std::vector<double> horizons;                 // strictly increasing
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> completed;  // [cap][horizon]: trees with zeta_cap > t
  bool nonincreasing_in_t = true;
  bool nondecreasing_in_cap = true;

  [[nodiscard]] double p_hat(std::size_t ci, std::size_t ti) const;
  [[nodiscard]] double std_error(std::size_t ci, std::size_t ti) const;
};

/// Estimates P(zeta_n > t) for every (cap, horizon) pair on shared trees:
/// tree i uses tree_key(seed, i) at every pair.
ExplosionTable explosion_table(const Frequency& xi, const KernelSpec& kernel, const std::vector<double>& horizons,
                               const std::vector<int>& caps, std::size_t n, std::uint64_t seed,
                               std::size_t workers = 1);

struct CompareReport {
  EstimateReport minimal;
  EstimateReport thinned;
  std::vector<double> z;  // per real component
  double max_abs_z = 0.0;
};

/// Minimal vs thinned on independent substreams (the thinned run uses
/// derived_seed(seed, 1)).
CompareReport compare_thinned_minimal(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                                      std::uint64_t seed, const EstimateOptions& opt = {});

/// A seed for an independent batch, derived from `seed` and a salt.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt);

/// z = (a - b)/sqrt(se_a^2 + se_b^2); 0 when both the difference and the
/// errors vanish.
double z_score(double a, double se_a, double b, double se_b);

struct ScalingReport {
  double lambda = 1.0;
  double p_scaled_frequency = 0.0;  // P(zeta_n > t) from lambda xi
  double se_scaled_frequency = 0.0;
  double p_scaled_time = 0.0;       // P(zeta_n > lambda^2 t) from xi
  double se_scaled_time = 0.0;
  double z = 0.0;
};

/// Compares the completed fractions from (lambda xi, t) and (xi, lambda^2 t)
/// at a matched cap. With `independent` false both runs share `seed`.
ScalingReport scaling_check(const Frequency& xi, double lambda, double t, std::size_t n, const KernelSpec& kernel,
                            std::uint64_t seed, int depth_cap = kDefaultDepthCap, bool independent = false,
                            std::size_t workers = 1);

/// First derivative of the transform, for the delta method.
double transform_derivative(const ScalarTransform& f, double x);

struct JensenReport {
  std::size_t n = 0;
  double mean_y = 0.0;
  double se_y = 0.0;
  double f_of_mean_y = 0.0;
  double se_f_of_mean_y = 0.0;  // delta method
  double mean_z = 0.0;
  double se_z = 0.0;
  bool estimator_ok = false;    // f(mean Y) <= mean Z + 3 sqrt(se_f^2 + se_z^2)
  std::size_t pathwise_violations = 0;
  double max_log_gap = 0.0;     // max over trees of ln f(Y) - ln Z
  double max_equality_deviation = 0.0;  // max |Z/f(Y) - 1| for multiplicative f
};

/// Compares f applied to the FMS cascade with the cascade of f applied to the
/// data, on shared trees.
JensenReport jensen_order_check(const SimConfig& cfg, const InitialDataSpec& data, const ScalarTransform& f,
                                std::size_t n, std::uint64_t seed, std::size_t workers = 1);

struct HolderReport {
  std::size_t n = 0;
  std::size_t pathwise_violations = 0;
  double max_equality_deviation = 0.0;  // max |Y / prod X_j^a_j - 1| over trees
  double mean_y = 0.0;
  double se_y = 0.0;
  std::vector<double> mean_x;
  std::vector<double> se_x;
  double product_bound = 0.0;  // prod mean_x^a_j
  double bound_se = 0.0;       // delta-method error of the bound, combined with se_y
  bool estimator_ok = false;
};

/// Checks the data precondition |chi_0| <= prod chi_0j^a_j on a radial grid.
/// Throws DomainError if it fails or the exponents are out of range.
void validate_holder_data(const RadialProfile& y, const std::vector<RadialProfile>& xs,
                          const std::vector<double>& alphas);

HolderReport holder_audit(const SimConfig& cfg, const RadialProfile& y, const std::vector<RadialProfile>& xs,
                          const std::vector<double>& alphas, std::size_t n, std::uint64_t seed,
                          std::size_t workers = 1);

struct MajorizeReport {
  std::size_t n = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max |X|/Y over trees with Y > 0
};

/// Pathwise |X| <= Y on N coupled trees. Violations are counted, not thrown.
MajorizeReport majorize_audit(const SimConfig& cfg, const InitialDataSpec& data, std::size_t n,
                              std::uint64_t seed, std::size_t workers = 1);

}  // namespace cascade
