#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wbslope/channel_model.hpp"
#include "wbslope/slope_metrics.hpp"

namespace wbs {

/// (1-eps)-interference pairs among K users. Pairs are stored as (i, j), i < j.
struct PairGraph {
  int k = 0;
  double epsilon = 0.0;
  std::set<std::pair<int, int>> strong_pairs;  // both cross ratios in [1-eps, 1)
  std::set<std::pair<int, int>> weak_pairs;    // at least one ratio in [1-eps, 1)

  bool strong(int i, int j) const { return strong_pairs.count(std::minmax(i, j)) > 0; }
  bool weak(int i, int j) const { return weak_pairs.count(std::minmax(i, j)) > 0; }
  /// True when user j belongs to at least one strong pair.
  bool strongly_paired(int j) const;
};

/// Pair relations from power gains g(rx, tx). The ratio for receiver j hearing
/// transmitter i is g(j, i) / g(i, i).
PairGraph detect_pairs(const Eigen::MatrixXd& power_gains, double epsilon);
PairGraph detect_pairs(const ChannelInstance& chan, double epsilon);

/// Bipartite graph with M left and M right vertices; adj[l] lists right
/// neighbours of left vertex l, numbered 0..M-1.
struct BipartiteGraph {
  int m = 0;
  std::vector<std::vector<int>> adj;
};

struct MatchingResult {
  std::optional<std::vector<std::pair<int, int>>> matched;  // (left, right) when perfect
  std::vector<int> violating_set;                           // left vertices S with |N(S)| < |S|
};

/// Maximum matching by Hopcroft-Karp. When it is not perfect the witness is
/// the set of left vertices reachable by alternating paths from an unmatched
/// left vertex; its neighbourhood is one smaller than the set.
MatchingResult hall_perfect_matching(const BipartiteGraph& graph);

/// Neighbourhood of a set of left vertices.
std::set<int> neighbourhood(const BipartiteGraph& graph, const std::vector<int>& left);

/// Weak pairs across the index split {0..M-1} / {M..2M-1}.
BipartiteGraph split_graph(const PairGraph& pairs);

/// Equal-rate outer bound from one channel sample. Users in a strong pair
/// (with any partner) take the paired power bound, the rest are treated as
/// interference-free. `delta_s0` is relative to 2K.
SlopeResult equal_rate_outer_sample(const ChannelInstance& chan, double epsilon);
SlopeResult equal_rate_outer_sample(const Eigen::MatrixXd& power_gains, double epsilon);

/// Closed form of the equal-rate bound in terms of the unpaired weight theta.
double equal_rate_outer_closed_form(double epsilon, double theta);

/// Share of sum_j 1/g_jj carried by users outside every strong pair.
double unpaired_fraction(const Eigen::MatrixXd& power_gains, const PairGraph& pairs);

/// Equal-power outer bound from one channel sample: a perfect matching of weak
/// pairs across the index split, a two-user Kramer bound on each matched pair
/// using its actual cross gains. Throws BoundUnavailable carrying the Hall
/// witness (left-half user indices) when no perfect matching exists.
SlopeResult equal_power_outer_sample(const ChannelInstance& chan, double epsilon);
SlopeResult equal_power_outer_sample(const Eigen::MatrixXd& power_gains, double epsilon);

/// Moments of X = |C_jj|.
struct CentralMoments {
  double mu = 0.0;
  double variance = 0.0;
  double skewness = 0.0;  // zero when the variance is zero
  double kurtosis = 0.0;  // zero when the variance is zero
};

struct MomentSummary {
  double m2 = 0.0;  // E|C_jj|^2
  double m4 = 0.0;  // E|C_jj|^4
  CentralMoments central;

  /// From the first four raw moments of |C_jj|.
  static MomentSummary from_raw(double r1, double r2, double r3, double r4);
  /// Sample moments of |C_jj| values.
  static MomentSummary from_samples(const std::vector<double>& abs_values);
  void validate() const;
};

/// 1 / (m2^2/m4 + 1). The same value is recomputed from the central moments
/// and the two must agree to 1e-12 (InvalidInput otherwise).
double asymptotic_equal_power_bound(const MomentSummary& moments);
double asymptotic_equal_power_bound_central(const CentralMoments& c);

/// Distribution of |C|^2 for every link.
struct GainDistribution {
  enum class Kind { Exponential, Rayleigh, Constant };
  Kind kind = Kind::Exponential;

  /// "exp", "rayleigh" or "const"; anything else is InvalidInput.
  static GainDistribution parse(const std::string& name);
  std::string name() const;
  double sample(std::mt19937_64& gen) const;
  /// Exact moments of |C| under this distribution.
  MomentSummary moments() const;
};

/// Wilson score interval.
struct Proportion {
  long long successes = 0;
  long long trials = 0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

Proportion wilson_interval(long long successes, long long trials, double z = 1.959963984540054);

struct PairingEstimate {
  int k = 0;
  double epsilon = 0.0;
  Proportion all_strong_paired;
  Proportion perfect_weak_matching;
};

/// Trial t draws a fresh K x K gain table from a generator seeded by
/// mix_seed(seed, t), so the result does not depend on `threads` (0 selects the
/// hardware concurrency).
PairingEstimate monte_carlo_pairing(const GainDistribution& dist, int k, double epsilon,
                                    long long trials, std::uint64_t seed, int threads = 0);

/// A K x K table of i.i.d. power gains.
Eigen::MatrixXd sample_power_gains(const GainDistribution& dist, int k, std::mt19937_64& gen);

}  // namespace wbs
