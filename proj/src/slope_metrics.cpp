#include "wbslope/slope_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "wbslope/errors.hpp"

namespace wbs {

std::string to_string(ConstraintKind kind) {
  return kind == ConstraintKind::EqualPower ? "equal-power" : "equal-rate";
}

ConstraintKind parse_constraint(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (c == '_' || c == '-' || c == ' ') continue;
    t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (t == "equalpower" || t == "power") return ConstraintKind::EqualPower;
  if (t == "equalrate" || t == "rate") return ConstraintKind::EqualRate;
  throw InvalidInput("unknown constraint '" + std::string(text) + "'");
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

SlopeResult normalized(SlopeResult r, double s0_no_interference) {
  if (!(s0_no_interference > 0.0)) throw InvalidInput("baseline slope must be positive");
  r.delta_s0 = r.s0 / s0_no_interference;
  return r;
}

void RateCurve::validate() const {
  if (samples.empty()) throw InvalidInput("rate curve is empty");
  if (!(samples.front().first > 0.0)) throw InvalidInput("first snr sample must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].second >= 0.0)) throw InvalidInput("rates must be nonnegative");
    if (i == 0) continue;
    if (!(samples[i].first > samples[i - 1].first))
      throw InvalidInput("snr samples must be strictly increasing");
    if (samples[i].second < samples[i - 1].second)
      throw InvalidInput("rates must be nondecreasing in snr");
  }
}

SlopeResult slope_from_rate_derivatives(double rdot0, double rddot0) {
  if (!(rdot0 > 0.0)) throw InvalidInput("R'(0) must be positive");
  if (!(rddot0 < 0.0)) throw DegenerateError("R''(0) must be negative for a finite slope");
  SlopeResult r;
  r.ebno_min_linear = std::numbers::ln2 / rdot0;
  r.ebno_min_db = to_db(r.ebno_min_linear);
  r.s0 = -2.0 * rdot0 * rdot0 / rddot0;
  return r;
}

SlopeResult slope_from_power_derivatives(double dsnr_dr0, double d2snr_dr2_0) {
  if (!(dsnr_dr0 > 0.0)) throw InvalidInput("snr'(0) must be positive");
  if (!(d2snr_dr2_0 > 0.0)) throw DegenerateError("snr''(0) must be positive for a finite slope");
  SlopeResult r;
  r.ebno_min_linear = dsnr_dr0;
  r.ebno_min_db = to_db(r.ebno_min_linear);
  r.s0 = 2.0 * dsnr_dr0 / d2snr_dr2_0 * std::numbers::ln2;
  return r;
}

namespace {

struct Extrapolated {
  double c1;     // q(0) = R'(0), nats
  double c2;     // q'(0) = R''(0) / 2
  double noise;  // rounding bound on s0, relative
};

// Lagrange extrapolation of q(s) = R(s)/s to s = 0 from the points x[i], with
// value and slope at 0 from the basis L_i(0) and L_i'(0) = -L_i(0) sum_{k != i} 1/x_k.
Extrapolated extrapolate_to_zero(const double* x, const double* q, const double* dq, int n) {
  double c1 = 0.0;
  double c2 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double l = 1.0;
    double inv = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      l *= -x[k] / (x[i] - x[k]);
      inv += 1.0 / x[k];
    }
    const double dl = -l * inv;
    c1 += l * q[i];
    c2 += dl * q[i];
    e1 += std::abs(l) * dq[i];
    e2 += std::abs(dl) * dq[i];
  }
  const double noise = 2.0 * e1 / std::abs(c1) + e2 / std::abs(c2);
  return {c1, c2, noise};
}

}  // namespace

SlopeResult numeric_slope_estimate(const RateCurve& curve) {
  curve.validate();
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> dq;
  const double eps = std::numeric_limits<double>::epsilon();
  for (const auto& [snr, rate] : curve.samples) {
    if (snr > kResolutionSnr) break;
    x.push_back(snr);
    q.push_back(rate * std::numbers::ln2 / snr);  // nats per unit snr
    // Samples are assumed good to a few ulps in absolute rate, as for log(1 + s).
    dq.push_back(4.0 * eps * std::max(1.0, rate) * std::numbers::ln2 / snr);
  }
  const int count = static_cast<int>(x.size());
  if (count < kMinLowSnrSamples)
    throw ResolutionError("need at least " + std::to_string(kMinLowSnrSamples) +
                          " samples with snr <= " + std::to_string(kResolutionSnr) + ", got " +
                          std::to_string(count));

  // Slide a window of up to kLevels consecutive samples; keep the window whose
  // combined truncation and rounding estimate is smallest. Truncation is
  // gauged by dropping the window's largest sample.
  constexpr int kLevels = 8;
  const int n = std::min(count, kLevels);
  SlopeResult best;
  best.error_estimate = std::numeric_limits<double>::infinity();
  for (int start = 0; start + n <= count; ++start) {
    const auto full = extrapolate_to_zero(&x[start], &q[start], &dq[start], n);
    const auto coarse = extrapolate_to_zero(&x[start], &q[start], &dq[start], n - 1);
    if (!(full.c1 > 0.0) || !(full.c2 < 0.0) || !(coarse.c1 > 0.0) || !(coarse.c2 < 0.0))
      continue;
    SlopeResult r = slope_from_rate_derivatives(full.c1, 2.0 * full.c2);
    const SlopeResult rc = slope_from_rate_derivatives(coarse.c1, 2.0 * coarse.c2);
    r.error_estimate = std::abs(r.s0 - rc.s0) + full.noise * r.s0;
    if (r.error_estimate < best.error_estimate) best = r;
  }
  if (!std::isfinite(best.error_estimate))
    throw DegenerateError("sampled curve has no negative curvature at zero");
  return best;
}

namespace {

void check_direct(const Eigen::VectorXd& g) {
  if (g.size() < 1 || !(g.array() > 0.0).all())
    throw InvalidInput("direct power gains must be positive");
}

}  // namespace

double ebnomin_closed_form(const Eigen::VectorXd& g, ConstraintKind kind) {
  check_direct(g);
  const double k = static_cast<double>(g.size());
  if (kind == ConstraintKind::EqualRate) return std::numbers::ln2 * g.cwiseInverse().sum() / k;
  return k * std::numbers::ln2 / g.sum();
}

double ebnomin_closed_form(const ChannelInstance& chan, ConstraintKind kind) {
  return ebnomin_closed_form(chan.direct_power_gains(), kind);
}

double interference_free_slope(const Eigen::VectorXd& g, ConstraintKind kind) {
  check_direct(g);
  if (kind == ConstraintKind::EqualRate) return 2.0 * static_cast<double>(g.size());
  const double s = g.sum();
  return 2.0 * s * s / g.squaredNorm();
}

double interference_free_slope(const ChannelInstance& chan, ConstraintKind kind) {
  return interference_free_slope(chan.direct_power_gains(), kind);
}

}  // namespace wbs
