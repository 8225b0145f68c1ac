#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wbslope/channel_model.hpp"
#include "wbslope/slope_metrics.hpp"

namespace wbs {

/// Parameters of the integer bandwidth search.
struct AlignmentConfig {
  double delta = 0.2;          // residual tolerance, in (0, 1)
  long long b_start = 1;       // first integer bandwidth tried
  long long b_max = 0;         // inclusive cap; 0 selects 10^7 * b_start
  double leakage_tol = 1e-9;   // series tolerance for leakage evaluation
  double delta_decay = 1.0;    // peak k uses delta * delta_decay^k, in (0, 1]

  long long effective_b_max() const { return b_max > 0 ? b_max : 10'000'000LL * b_start; }
  void validate() const;
};

/// An integer bandwidth with its alignment certificate.
struct BandwidthCandidate {
  long long b = 0;
  MatrixXll k;                // nearest integer to (tau_ji b - 1)/2, off-diagonal
  Eigen::MatrixXd residual;   // |tau_ji b - 2 k_ji - 1|, zero on the diagonal
  double residual_max = 0.0;
  Eigen::VectorXd leakage;    // epsilon_j(b) in watts; empty when no channel was given
};

struct SweepPoint {
  double b = 0.0;
  double ebno_db = 0.0;
  double spectral_efficiency = 0.0;  // bits/s/Hz, sum over users
  double leakage_total = 0.0;        // sum_j epsilon_j(b), watts
};

/// Off-diagonal residuals of `delays` at bandwidth b; the diagonal is ignored.
BandwidthCandidate alignment_residuals(const Eigen::MatrixXd& delays, long long b);

/// Smallest integer b in [b_start, b_max] with every off-diagonal residual
/// <= delta. Throws SearchExhausted carrying the b with the smallest maximum
/// residual when the cap is reached.
BandwidthCandidate search_bandwidth(const Eigen::MatrixXd& delays, const AlignmentConfig& cfg);

/// Same search on the receiver-relative delays of `chan`, with leakage
/// evaluated at the returned b.
BandwidthCandidate search_bandwidth(const ChannelInstance& chan, const AlignmentConfig& cfg);

/// Per-user rates in bits/s/Hz of the even-slot scheme at bandwidth b:
/// R_j = 1/2 log2(1 + (|C_jj|^2 2P_j/(b N0)) / (1 + eps_j/(b N0))).
Eigen::VectorXd achievable_rate_with_leakage(const ChannelInstance& chan, double b,
                                             const Eigen::VectorXd& leakage);

/// Sum slope of the even-slot scheme with the leakage coefficients of
/// bandwidth b held fixed while the power goes to zero. `delta_s0` is
/// normalised by the interference-free slope.
SlopeResult definition2_slope(const ChannelInstance& chan, double b, ConstraintKind kind,
                              double tol = 1e-9);

/// Same quantity measured numerically: the sum rate is sampled on a log snr
/// grid and passed through numeric_slope_estimate.
SlopeResult definition2_slope_numeric(const ChannelInstance& chan, double b, ConstraintKind kind,
                                      double tol = 1e-9);

/// Per b: leakage at the channel powers, rates, and Eb/N0 = sum snr / sum R.
/// Under equal rate the total power sum_j P_j is redistributed so all users
/// get the same rate.
std::vector<SweepPoint> sweep_bandwidth(const ChannelInstance& chan,
                                        const std::vector<double>& b_grid, ConstraintKind kind,
                                        double tol = 1e-9);

struct PeakSequence {
  std::vector<BandwidthCandidate> peaks;
  std::optional<std::string> warning;  // set when the cap was hit early
};

/// Successive aligned bandwidths, restarting the search at b + 1 after each
/// hit. Peak k (from 0) is searched with tolerance delta * delta_decay^k.
PeakSequence peak_sequence(const ChannelInstance& chan, const AlignmentConfig& cfg, int count);

/// Slope estimate along a bandwidth subsequence: each peak's numeric slope, and
/// the largest of them as the finite-sample stand-in for the limit superior.
struct SequenceSlope {
  std::vector<SlopeResult> per_peak;
  SlopeResult limsup;
};

SequenceSlope sequence_slope(const ChannelInstance& chan, const std::vector<BandwidthCandidate>& peaks,
                             ConstraintKind kind, double tol = 1e-9);

}  // namespace wbs
