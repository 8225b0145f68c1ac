#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace wbs {

using MatrixXll = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// K-user line-of-sight interference channel.
///
/// Indexing follows receiver-major order: `gains(j, i)` is the complex
/// amplitude from transmitter i to receiver j, `delays(j, i)` the matching
/// propagation delay in seconds. The carrier phase is already folded into the
/// gains.
struct ChannelInstance {
  Eigen::MatrixXcd gains;
  Eigen::MatrixXd delays;
  double noise_density = 1.0;  // N0, W/Hz
  Eigen::VectorXd powers;      // P_j, W

  int users() const { return static_cast<int>(gains.rows()); }

  /// |C_ji|^2.
  Eigen::MatrixXd power_gains() const { return gains.cwiseAbs2(); }
  Eigen::VectorXd direct_power_gains() const { return gains.diagonal().cwiseAbs2(); }

  /// Throws InvalidInput unless K >= 2, shapes agree, direct links are
  /// nonzero, delays are finite and nonnegative, and N0 and powers are positive.
  void validate() const;
};

/// Integer and fractional sample delays at bandwidth `bandwidth`:
/// n = floor(tau*B + 1/2), delta = tau*B - n in [-1/2, 1/2).
struct DiscretizedDelays {
  double bandwidth = 0.0;
  MatrixXll n;
  Eigen::MatrixXd delta;
};

/// Node placement for `channel_from_geometry`. Positions are 3-vectors; use
/// z = 0 for planar layouts.
struct GeometryConfig {
  std::vector<Eigen::Vector3d> positions_tx;
  std::vector<Eigen::Vector3d> positions_rx;
  double pathloss_exponent = 2.0;
  double wave_speed = 299792458.0;
  std::uint64_t rng_seed = 0;
  double noise_density = 1.0;
  double power = 1.0;  // per-user transmit power
};

/// tau_ji = d_ji / c, |C_ji| = d_ji^(-alpha/2), arg C_ji ~ U[0, 2*pi) drawn in
/// receiver-major order from a generator seeded with `geom.rng_seed`.
ChannelInstance channel_from_geometry(const GeometryConfig& geom);

/// Channel with unit-free symmetric gains: |C_jj|^2 = direct, |C_ji|^2 = cross,
/// zero phases, unit powers and N0.
ChannelInstance symmetric_channel(const Eigen::MatrixXd& delays, double direct_power_gain,
                                  double cross_power_gain);

DiscretizedDelays discretize(const Eigen::MatrixXd& delays, double bandwidth);
DiscretizedDelays discretize(const ChannelInstance& chan, double bandwidth);

/// Delays seen at each receiver after aligning its clock to the desired
/// signal: row j is shifted by -tau_jj so the diagonal becomes zero.
Eigen::MatrixXd receiver_relative_delays(const ChannelInstance& chan);

/// Number of terms kept on each side of the centre of the sinc series so that
/// the bound on the error of the corrected tail (see sinc_leakage_series) is
/// below `tol`.
long long leakage_truncation_point(long long n1, long long n2, double delta, double power,
                                   double tol);

/// Series sum_m 2P sinc(n1-2m+delta) sinc(n2-2m+delta): `half_width` terms
/// either side of the centre are summed directly and the two tails beyond are
/// replaced by their Euler-Maclaurin estimate (integral, endpoint and first
/// derivative terms).
double sinc_leakage_series(long long n1, long long n2, double delta, double power,
                           long long half_width);

/// E[x~*[n1] x~[n2]] for an even-slot-only i.i.d. input of variance 2P passed
/// through a fractional delay `delta`, accurate to `tol`. The kernel is real,
/// so the covariance is real.
double sinc_leakage_covariance(long long n1, long long n2, double delta, double power,
                               double tol);

/// Per-link leakage coefficient 2*|C_ji|^2*S_ji at bandwidth B, where S_ji is
/// the unit-power variance that link i leaks into the even slots of receiver
/// j. Multiplying row j by the powers gives epsilon_j(B). Diagonal is zero.
Eigen::MatrixXd leakage_coefficients(const ChannelInstance& chan, double bandwidth, double tol);

/// epsilon_j(B) = sum_{i != j} |C_ji|^2 * Var(x~_i at the even slots of receiver j), in watts.
Eigen::VectorXd leaked_interference_power(const ChannelInstance& chan, double bandwidth,
                                          double tol);

}  // namespace wbs
