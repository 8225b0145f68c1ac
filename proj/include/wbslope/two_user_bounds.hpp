#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbslope/slope_metrics.hpp"

namespace wbs {

/// Power gains of a 2-user channel; g_ji = |C_ji|^2 is the gain from
/// transmitter i to receiver j.
struct TwoUserGains {
  double g11 = 1.0;
  double g12 = 0.0;
  double g21 = 0.0;
  double g22 = 1.0;

  /// Unit direct gains, both cross gains equal to `a`.
  static TwoUserGains symmetric(double a) { return {1.0, a, a, 1.0}; }
  static TwoUserGains from_channel(const ChannelInstance& chan);

  /// Throws InvalidInput unless g11, g22 > 0 and cross gains are finite and >= 0.
  void validate() const;
};

enum class BoundKind {
  TIN,
  TDMA,
  InterferenceDecoding,
  KramerEqualPower,
  KramerEqualRate,
  NoisyExact,
  InterferenceFree,
};

std::string to_string(BoundKind kind);

/// One achievable scheme or outer bound. `s0` and `ebno_min_linear` are set
/// only when `valid` is true.
struct BoundRecord {
  BoundKind kind = BoundKind::TIN;
  bool valid = false;
  std::optional<double> s0;
  std::optional<double> ebno_min_linear;
  std::string condition_detail;
};

/// Sum slope of a single achievable scheme (TIN, TDMA or
/// InterferenceDecoding). Interference decoding is used at receiver j only when
/// g_ji > g_ii; the other receiver treats interference as noise. It is
/// reported invalid when neither receiver sees strong interference.
BoundRecord scheme_slope(const TwoUserGains& g, BoundKind scheme, ConstraintKind kind);

/// Best of the three schemes. Ties go to the first of
/// InterferenceDecoding, TIN, TDMA.
BoundRecord inner_bound_slope(const TwoUserGains& g, ConstraintKind kind);

/// Kramer sum-rate bound for the weak direction(s), minimised over the
/// directions that apply. Invalid when neither g21 < g11 nor g12 < g22.
BoundRecord kramer_outer_equal_power(const TwoUserGains& g);

/// Minimiser of snr1 + snr2 subject to the two Kramer rate constraints at
/// R1 = R2 = sum_rate/2 (bits), snr >= 0.
struct KramerRateLp {
  double snr1o = 0.0;
  double snr2o = 0.0;
  bool interior_vertex = false;  // both rate constraints active, A^-1 b
};

KramerRateLp kramer_equal_rate_lp(const TwoUserGains& g, double sum_rate_bits);

/// Slope of the LP optimum as a function of the sum rate. Requires both links
/// weak; also invalid when the bound would not reproduce the minimum energy per
/// bit of the channel.
BoundRecord kramer_outer_equal_rate(const TwoUserGains& g);

/// Closed form of the equal-rate Kramer slope when the interior vertex is optimal.
double kramer_equal_rate_closed_form(const TwoUserGains& g);

/// Sufficient condition under which treating interference as noise is
/// sum-rate optimal at per-user SNRs (snr1, snr2). When valid, the record
/// carries the exact equal-power sum slope. Use snr1 = snr2 = 0 for the
/// low-SNR limit.
BoundRecord noisy_interference(const TwoUserGains& g, double snr1, double snr2);

/// Tightest applicable outer bound: Kramer, the exact noisy-interference value
/// (equal power only) and the interference-free slope.
BoundRecord outer_bound_slope(const TwoUserGains& g, ConstraintKind kind);

struct Fig2Row {
  double a = 0.0;
  double inner_s0 = 0.0;
  BoundKind inner_scheme = BoundKind::TIN;
  std::optional<double> kramer_s0;  // a < 1
  std::optional<double> outer_s0;   // best outer; absent at a = 1
  bool exact = false;
};

/// Symmetric-channel sweep: inner bound, Kramer outer for a < 1, the
/// interference-free value for a > 1, and the exactness flag.
std::vector<Fig2Row> fig2_sweep(const std::vector<double>& a_grid,
                                ConstraintKind kind = ConstraintKind::EqualPower);

}  // namespace wbs
