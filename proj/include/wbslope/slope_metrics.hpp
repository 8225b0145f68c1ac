#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wbslope/channel_model.hpp"
#include "wbslope/taylor.hpp"

namespace wbs {

enum class ConstraintKind { EqualPower, EqualRate };

std::string to_string(ConstraintKind kind);
/// Accepts "equal-power" / "equal_power" / "EqualPower" and the rate analogues.
ConstraintKind parse_constraint(std::string_view text);

/// Minimum energy per bit and wideband slope of a sum-rate law.
///
/// `s0` is in bits/s/Hz per 3 dB. `delta_s0` is filled only once the result
/// has been normalised against an interference-free baseline.
struct SlopeResult {
  double ebno_min_linear = 0.0;
  double ebno_min_db = 0.0;
  double s0 = 0.0;
  std::optional<double> delta_s0;
  double error_estimate = 0.0;
};

double to_db(double linear);

/// Returns a copy with delta_s0 = s0 / s0_no_interference.
SlopeResult normalized(SlopeResult r, double s0_no_interference);

/// Sampled spectral efficiency R(snr) in bits/s/Hz. `snr` is the total
/// transmitted SNR (sum over users), so the derived Eb/N0 is per transmitted bit.
struct RateCurve {
  std::vector<std::pair<double, double>> samples;  // (snr, rate)

  /// Throws InvalidInput unless snr is strictly increasing and positive and
  /// rates are nonnegative and nondecreasing.
  void validate() const;
};

/// From R'(0) and R''(0) with R in nats: Eb/N0|min = ln2 / R'(0),
/// S0 = -2 R'(0)^2 / R''(0).
SlopeResult slope_from_rate_derivatives(double rdot0, double rddot0);

/// From the inverse law snr(R) with R in bits: Eb/N0|min = snr'(0),
/// S0 = 2 snr'(0) / snr''(0) * ln2.
SlopeResult slope_from_power_derivatives(double dsnr_dr0, double d2snr_dr2_0);

/// Convenience wrappers for laws evaluated on Taylor2.
inline SlopeResult slope_from_rate_taylor(const Taylor2<double>& rate_nats) {
  return slope_from_rate_derivatives(rate_nats.first_derivative(), rate_nats.second_derivative());
}
inline SlopeResult slope_from_power_taylor(const Taylor2<double>& snr_of_bits) {
  return slope_from_power_derivatives(snr_of_bits.first_derivative(),
                                      snr_of_bits.second_derivative());
}

/// Minimum number of samples at snr <= `kResolutionSnr` that
/// numeric_slope_estimate requires.
inline constexpr int kMinLowSnrSamples = 6;
inline constexpr double kResolutionSnr = 1e-2;

/// Estimates R'(0) and R''(0) by polynomial (Richardson/Neville) extrapolation
/// of R(snr)/snr to snr = 0 over windows of up to 8 consecutive samples with
/// snr <= kResolutionSnr, using R(0) = 0. The reported window is the one with
/// the smallest error estimate: the change in S0 when the window's largest
/// sample is dropped, plus the propagated rounding of samples assumed accurate
/// to a few ulps in absolute rate.
SlopeResult numeric_slope_estimate(const RateCurve& curve);

/// Closed forms in terms of the direct power gains |C_jj|^2.
double ebnomin_closed_form(const Eigen::VectorXd& direct_power_gains, ConstraintKind kind);
double ebnomin_closed_form(const ChannelInstance& chan, ConstraintKind kind);
double interference_free_slope(const Eigen::VectorXd& direct_power_gains, ConstraintKind kind);
double interference_free_slope(const ChannelInstance& chan, ConstraintKind kind);

}  // namespace wbs
