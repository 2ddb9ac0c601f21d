// SPDX-License-Identifier: Apache-2.0
//
// Branching cascade sampler and the minimal, thinned and depth-truncated
// recursions for the vector (FNS) and scalar (FMS) equations.
//
// Each tree is a pure function of (config, data, key). The key seeds the
// root's stream; every vertex derives its own stream from its parent's key
// and child slot, so two evaluations of the same tree with different
// horizons, caps or modes agree wherever they visit the same vertex.
//
// Per-vertex draw order: clock uniform, Bernoulli uniform (always drawn, used
// only in thinned mode), then the branch uniforms.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/freq_algebra.hpp"
#include "cascade/initial_data.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

/// Raised when a pathwise invariant that must hold on every tree fails.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// m * 2^e with |m| in [1/2, 1) or m = 0.
struct ScaledReal {
  double m = 0.0;
  std::int64_t e = 0;

  static ScaledReal from(double x);
  /// Positive value given by its natural log; zero for -inf.
  static ScaledReal from_log(double ln_x);
  void normalize();
  [[nodiscard]] double value() const;
  /// log2 |value|, -inf for zero.
  [[nodiscard]] double log2_abs() const;

  friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b);
};

/// Complex vector m * 2^e with max |component part| in [1/2, 1) or m = 0.
struct ScaledVec {
  ComplexVec m;
  std::int64_t e = 0;

  static ScaledVec from(const ComplexVec& v);
  void normalize();
  [[nodiscard]] ComplexVec value() const;
  [[nodiscard]] double log2_norm() const;
};

enum class Equation { FNS, FMS };
enum class Mode { Minimal, Thinned };
enum class TreeStatus { Completed, DepthCapped, ThinnedZero };

std::string to_string(Equation e);
std::string to_string(Mode m);
std::string to_string(TreeStatus s);
Equation parse_equation(const std::string& s);
Mode parse_mode(const std::string& s);

inline constexpr int kDefaultDepthCap = 64;

struct SimConfig {
  Frequency root{1.0, 0.0, 0.0};
  double horizon = 1.0;
  int depth_cap = kDefaultDepthCap;
  Mode mode = Mode::Minimal;
  double p = 0.5;  // thinned branching probability
  Equation equation = Equation::FMS;
  KernelSpec kernel = KernelSpec::scale_invariant();

  /// Throws DomainError on an invalid combination.
  void validate() const;
};

struct TreeOutcome {
  Equation equation = Equation::FMS;
  TreeStatus status = TreeStatus::Completed;
  ComplexVec vec;               // FNS mantissa
  double scalar = 0.0;          // FMS mantissa
  std::int64_t log2_scale = 0;  // value = mantissa * 2^log2_scale
  std::uint64_t leaf_count = 0;
  std::uint64_t branch_count = 0;
  int height = 0;               // largest leaf depth, root at depth 0

  [[nodiscard]] bool completed() const { return status == TreeStatus::Completed; }
  [[nodiscard]] ComplexVec fns_value() const;
  [[nodiscard]] double fms_value() const;
  /// log2 of |value| (Euclidean norm for FNS); -inf for zero.
  [[nodiscard]] double log2_magnitude() const;
};

/// Minimal (un-thinned) recursion, truncated at cfg.depth_cap. `key` is the
/// tree's substream key, normally tree_key(seed, index).
TreeOutcome simulate_minimal(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key);

/// Thinned recursion with Bernoulli(p) branching marks and factor 1/p per
/// branch.
TreeOutcome simulate_thinned(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key);

/// Dispatches on cfg.mode.
TreeOutcome simulate(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key);

struct CoupledOutcome {
  TreeOutcome fns;
  TreeOutcome fms;
};

/// Relative slack allowed in |X| <= Y.
inline constexpr double kMajorizeSlack = 1e-10;

/// FNS and FMS values on one shared tree (minimal mode). Throws
/// InvariantViolation if |X| > Y beyond kMajorizeSlack.
CoupledOutcome simulate_coupled_fns_fms(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key);

/// Same evaluation without the pathwise check, for audits that count
/// violations instead of stopping at the first.
CoupledOutcome simulate_coupled_unchecked(const SimConfig& cfg, const InitialDataSpec& data, std::uint64_t key);

/// True when |X| <= Y within kMajorizeSlack.
bool majorized(const CoupledOutcome& c);

/// Scalar maps applied to the FMS data.
struct ScalarTransform {
  enum class Kind { Identity, Power, SquareLog };
  Kind kind = Kind::Identity;
  double alpha = 1.0;

  static ScalarTransform identity() { return {}; }
  /// x^alpha; exactly multiplicative.
  static ScalarTransform power(double alpha);
  /// x^2 ln(x^2 + e^2); submultiplicative, convex, f(0) = 0.
  static ScalarTransform square_log() { return {Kind::SquareLog, 2.0}; }
  /// Parses "x", "pow:a" (or "x^a"), "x2log".
  static ScalarTransform parse(const std::string& s);

  [[nodiscard]] bool multiplicative() const { return kind != Kind::SquareLog; }
  double operator()(double x) const;
  /// ln f(x) from ln x, usable when x itself over- or underflows.
  [[nodiscard]] double log_apply(double log_x) const;
  [[nodiscard]] std::string to_string() const;
};

/// One scalar channel of a shared-tree evaluation: leaf value f(g(|W|)).
struct ScalarChannel {
  RadialProfile profile;
  ScalarTransform transform;
};

inline constexpr std::size_t kMaxChannels = 8;

/// Evaluates every channel on one shared tree. All outcomes share status
/// and tree statistics.
std::vector<TreeOutcome> simulate_channels(const SimConfig& cfg, const std::vector<ScalarChannel>& channels,
                                           std::uint64_t key);

/// Element 0 is the plain FMS value Y; element i + 1 is the cascade value
/// with leaf data transforms[i](|chi_0|). FMS only.
std::vector<TreeOutcome> simulate_scalar_family(const SimConfig& cfg, const InitialDataSpec& data,
                                                const std::vector<ScalarTransform>& transforms,
                                                std::uint64_t key);

/// Clock and branching process only. Completed iff no path reaches the
/// depth cap before the horizon.
TreeOutcome explosion_indicator(const SimConfig& cfg, std::uint64_t key);

}  // namespace cascade
