#include "wbslope/delay_alignment.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wbslope/errors.hpp"

namespace wbs {

void AlignmentConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (b_start < 1) throw InvalidInput("b_start must be at least 1");
  if (effective_b_max() < b_start) throw InvalidInput("b_max must be >= b_start");
  if (!(leakage_tol > 0.0)) throw InvalidInput("leakage tolerance must be positive");
  if (!(delta_decay > 0.0 && delta_decay <= 1.0)) throw InvalidInput("delta_decay must lie in (0, 1]");
}

namespace {

void check_delays(const Eigen::MatrixXd& delays) {
  if (delays.rows() < 2 || delays.rows() != delays.cols())
    throw InvalidInput("delay matrix must be square with at least 2 users");
  for (Eigen::Index j = 0; j < delays.rows(); ++j)
    for (Eigen::Index i = 0; i < delays.cols(); ++i)
      if (i != j && !std::isfinite(delays(j, i))) throw InvalidInput("delays must be finite");
}

double residual_of(double x, long long* k_out) {
  const double k = std::floor((x - 1.0) / 2.0 + 0.5);
  if (k_out) *k_out = static_cast<long long>(k);
  return std::abs(x - 2.0 * k - 1.0);
}

}  // namespace

BandwidthCandidate alignment_residuals(const Eigen::MatrixXd& delays, long long b) {
  check_delays(delays);
  const auto n = delays.rows();
  BandwidthCandidate c;
  c.b = b;
  c.k = MatrixXll::Zero(n, n);
  c.residual = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      c.residual(j, i) = residual_of(delays(j, i) * static_cast<double>(b), &c.k(j, i));
      c.residual_max = std::max(c.residual_max, c.residual(j, i));
    }
  return c;
}

BandwidthCandidate search_bandwidth(const Eigen::MatrixXd& delays, const AlignmentConfig& cfg) {
  cfg.validate();
  check_delays(delays);
  const auto n = delays.rows();
  std::vector<double> taus;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) taus.push_back(delays(j, i));

  const long long cap = cfg.effective_b_max();
  long long best_b = cfg.b_start;
  double best = std::numeric_limits<double>::infinity();
  for (long long b = cfg.b_start; b <= cap; ++b) {
    const double bd = static_cast<double>(b);
    double worst = 0.0;
    // Stop scanning links once this b can neither qualify nor beat the best miss.
    const double give_up = std::max(cfg.delta, best);
    for (double t : taus) {
      worst = std::max(worst, residual_of(t * bd, nullptr));
      if (worst > give_up) break;
    }
    if (worst <= cfg.delta) return alignment_residuals(delays, b);
    if (worst < best) {
      best = worst;
      best_b = b;
    }
  }
  throw SearchExhausted(best_b, best);
}

BandwidthCandidate search_bandwidth(const ChannelInstance& chan, const AlignmentConfig& cfg) {
  chan.validate();
  BandwidthCandidate c = search_bandwidth(receiver_relative_delays(chan), cfg);
  c.leakage = leaked_interference_power(chan, static_cast<double>(c.b), cfg.leakage_tol);
  return c;
}

Eigen::VectorXd achievable_rate_with_leakage(const ChannelInstance& chan, double b,
                                             const Eigen::VectorXd& leakage) {
  chan.validate();
  if (!(b > 0.0)) throw InvalidInput("bandwidth must be positive");
  if (leakage.size() != chan.users() || (leakage.array() < 0.0).any())
    throw InvalidInput("leakage must be a nonnegative vector of length K");
  const double bn0 = b * chan.noise_density;
  const Eigen::VectorXd g = chan.direct_power_gains();
  Eigen::VectorXd r(chan.users());
  for (int j = 0; j < chan.users(); ++j) {
    const double sinr = g(j) * 2.0 * chan.powers(j) / bn0 / (1.0 + leakage(j) / bn0);
    r(j) = 0.5 * std::log1p(sinr) / std::numbers::ln2;
  }
  return r;
}

namespace {

// Leakage coefficients in snr units: eps_j / (b N0) = sum_i L_ji snr_i.
struct SchemeModel {
  Eigen::VectorXd g;
  Eigen::MatrixXd lc;
  int k;
};

SchemeModel scheme_model(const ChannelInstance& chan, double b, double tol) {
  chan.validate();
  if (!(b > 0.0)) throw InvalidInput("bandwidth must be positive");
  return {chan.direct_power_gains(), leakage_coefficients(chan, b, tol), chan.users()};
}

// Sum rate in bits at total snr s shared equally.
double equal_power_sum_rate(const SchemeModel& m, double s) {
  const Eigen::VectorXd snr = Eigen::VectorXd::Constant(m.k, s / m.k);
  const Eigen::VectorXd noise = Eigen::VectorXd::Ones(m.k) + m.lc * snr;
  double r = 0.0;
  for (int j = 0; j < m.k; ++j) r += 0.5 * std::log1p(2.0 * m.g(j) * snr(j) / noise(j));
  return r / std::numbers::ln2;
}

// Per-user snr giving every user 1/2 log2(1 + y): (2G - y L) s = y 1.
// Returns an empty vector when y is beyond the feasible range.
Eigen::VectorXd equal_rate_powers(const SchemeModel& m, double y) {
  Eigen::MatrixXd a = -y * m.lc;
  a.diagonal() += 2.0 * m.g;
  const Eigen::VectorXd s = a.partialPivLu().solve(Eigen::VectorXd::Constant(m.k, y));
  if (!s.allFinite() || (s.array() <= 0.0).any()) return {};
  return s;
}

}  // namespace

SlopeResult definition2_slope(const ChannelInstance& chan, double b, ConstraintKind kind,
                              double tol) {
  const SchemeModel m = scheme_model(chan, b, tol);
  const double kk = static_cast<double>(m.k);
  SlopeResult r;
  if (kind == ConstraintKind::EqualPower) {
    // R_j = 1/2 [ln(1 + (2g_j + l_j) s/K) - ln(1 + l_j s/K)], l_j = sum_i L_ji.
    const Eigen::VectorXd l = m.lc.rowwise().sum();
    const double rdot = m.g.sum() / kk;
    double rddot = 0.0;
    for (int j = 0; j < m.k; ++j) {
      const double u = (2.0 * m.g(j) + l(j)) / kk;
      const double v = l(j) / kk;
      rddot += 0.5 * (-u * u + v * v);
    }
    r = slope_from_rate_derivatives(rdot, rddot);
  } else {
    // y = 2^{2t/K} - 1 with t the sum rate in bits; s = y A^-1 1 + y^2 A^-1 L A^-1 1 + O(y^3).
    const double y1 = 2.0 * std::numbers::ln2 / kk;
    const double y2 = 0.5 * y1 * y1;
    const Eigen::VectorXd ainv1 = (2.0 * m.g).cwiseInverse();
    const Eigen::VectorXd cross = ainv1.cwiseProduct(m.lc * ainv1);
    const double s1 = y1 * ainv1.sum();
    const double s2 = y2 * ainv1.sum() + y1 * y1 * cross.sum();
    r = slope_from_power_derivatives(s1, 2.0 * s2);
  }
  return normalized(r, interference_free_slope(m.g, kind));
}

SlopeResult definition2_slope_numeric(const ChannelInstance& chan, double b, ConstraintKind kind,
                                      double tol) {
  const SchemeModel m = scheme_model(chan, b, tol);
  RateCurve curve;
  constexpr int kPerDecade = 8;
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1e-2;
  const int n = static_cast<int>(std::round(std::log10(kHi / kLo) * kPerDecade));
  if (kind == ConstraintKind::EqualPower) {
    for (int i = 0; i <= n; ++i) {
      const double s = kLo * std::pow(10.0, static_cast<double>(i) / kPerDecade);
      curve.samples.emplace_back(s, equal_power_sum_rate(m, s));
    }
  } else {
    // Sample in rate and solve for the power; y is chosen so the total snr
    // lands near the same log grid.
    const double slope0 = 2.0 * (2.0 * m.g).cwiseInverse().sum();  // d(total snr)/dy at 0
    for (int i = 0; i <= n; ++i) {
      const double target = kLo * std::pow(10.0, static_cast<double>(i) / kPerDecade);
      const double y = target / slope0 * 2.0;
      const Eigen::VectorXd s = equal_rate_powers(m, y);
      if (s.size() == 0) break;
      const double rate = m.k * 0.5 * std::log1p(y) / std::numbers::ln2;
      curve.samples.emplace_back(s.sum(), rate);
    }
  }
  return normalized(numeric_slope_estimate(curve), interference_free_slope(m.g, kind));
}

std::vector<SweepPoint> sweep_bandwidth(const ChannelInstance& chan,
                                        const std::vector<double>& b_grid, ConstraintKind kind,
                                        double tol) {
  chan.validate();
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    if (!(b_grid[i] > 0.0)) throw InvalidInput("bandwidth grid must be positive");
    if (i > 0 && !(b_grid[i] > b_grid[i - 1])) throw InvalidInput("bandwidth grid must ascend");
  }
  std::vector<SweepPoint> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    const SchemeModel m = scheme_model(chan, b, tol);
    const double bn0 = b * chan.noise_density;
    SweepPoint p;
    p.b = b;
    Eigen::VectorXd snr;
    double rate = 0.0;
    if (kind == ConstraintKind::EqualPower) {
      snr = chan.powers / bn0;
      const Eigen::VectorXd eps = m.lc * chan.powers;
      rate = achievable_rate_with_leakage(chan, b, eps).sum();
    } else {
      // Largest common per-user y whose power vector fits the total budget.
      const double budget = chan.powers.sum() / bn0;
      double lo = 0.0;
      double hi = 1.0;
      auto total = [&](double y) {
        const Eigen::VectorXd s = equal_rate_powers(m, y);
        return s.size() == 0 ? std::numeric_limits<double>::infinity() : s.sum();
      };
      while (total(hi) < budget) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) <= budget ? lo : hi) = mid;
      }
      snr = equal_rate_powers(m, lo);
      if (snr.size() == 0) snr = Eigen::VectorXd::Zero(m.k);
      rate = m.k * 0.5 * std::log1p(lo) / std::numbers::ln2;
    }
    const Eigen::VectorXd leak = m.lc * (snr * bn0);
    p.spectral_efficiency = rate;
    p.leakage_total = leak.sum();
    p.ebno_db = rate > 0.0 ? to_db(snr.sum() / rate) : std::numeric_limits<double>::infinity();
    out.push_back(p);
  }
  return out;
}

PeakSequence peak_sequence(const ChannelInstance& chan, const AlignmentConfig& cfg, int count) {
  cfg.validate();
  if (count < 2) throw InvalidInput("peak count must be at least 2");
  PeakSequence seq;
  AlignmentConfig step = cfg;
  step.b_max = cfg.effective_b_max();
  for (int k = 0; k < count; ++k) {
    step.delta = cfg.delta * std::pow(cfg.delta_decay, k);
    try {
      seq.peaks.push_back(search_bandwidth(chan, step));
    } catch (const SearchExhausted& e) {
      seq.warning = "found " + std::to_string(k) + " of " + std::to_string(count) +
                    " peaks before b_max=" + std::to_string(step.b_max) + "; " + e.what();
      break;
    }
    step.b_start = seq.peaks.back().b + 1;
    if (step.b_start > step.b_max) {
      if (k + 1 < count)
        seq.warning = "found " + std::to_string(k + 1) + " of " + std::to_string(count) +
                      " peaks before b_max=" + std::to_string(step.b_max);
      break;
    }
  }
  return seq;
}

SequenceSlope sequence_slope(const ChannelInstance& chan,
                             const std::vector<BandwidthCandidate>& peaks, ConstraintKind kind,
                             double tol) {
  if (peaks.empty()) throw InvalidInput("empty bandwidth sequence");
  SequenceSlope out;
  for (const auto& p : peaks) {
    out.per_peak.push_back(definition2_slope_numeric(chan, static_cast<double>(p.b), kind, tol));
    if (out.per_peak.size() == 1 || out.per_peak.back().s0 > out.limsup.s0)
      out.limsup = out.per_peak.back();
  }
  return out;
}

}  // namespace wbs
