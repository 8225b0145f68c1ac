#include "wbslope/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wbslope/errors.hpp"
#include "wbslope/random.hpp"

namespace wbs {

void ChannelInstance::validate() const {
  const auto k = gains.rows();
  if (k < 2) throw InvalidInput("channel needs at least 2 users");
  if (gains.cols() != k || delays.rows() != k || delays.cols() != k || powers.size() != k)
    throw InvalidInput("channel matrices must be KxK and powers length K");
  for (Eigen::Index j = 0; j < k; ++j)
    if (std::abs(gains(j, j)) == 0.0) throw InvalidInput("direct gain |C_jj| must be nonzero");
  if (!delays.allFinite() || (delays.array() < 0.0).any())
    throw InvalidInput("delays must be finite and nonnegative");
  if (!(noise_density > 0.0)) throw InvalidInput("noise density must be positive");
  if (!(powers.array() > 0.0).all()) throw InvalidInput("powers must be positive");
}

ChannelInstance channel_from_geometry(const GeometryConfig& geom) {
  const auto k = geom.positions_tx.size();
  if (k < 2 || geom.positions_rx.size() != k)
    throw InvalidInput("geometry needs matching tx/rx lists with at least 2 users");
  if (!(geom.pathloss_exponent > 0.0)) throw InvalidInput("pathloss exponent must be positive");
  if (!(geom.wave_speed > 0.0)) throw InvalidInput("wave speed must be positive");

  const auto n = static_cast<Eigen::Index>(k);
  ChannelInstance chan;
  chan.gains.resize(n, n);
  chan.delays.resize(n, n);
  chan.noise_density = geom.noise_density;
  chan.powers = Eigen::VectorXd::Constant(n, geom.power);

  std::mt19937_64 gen(geom.rng_seed);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (geom.positions_rx[j] - geom.positions_tx[i]).norm();
      if (!(d > 0.0))
        throw InvalidInput("transmitter " + std::to_string(i) + " and receiver " +
                           std::to_string(j) + " coincide");
      const double amplitude = std::pow(d, -geom.pathloss_exponent / 2.0);
      const double phase = 2.0 * std::numbers::pi * uniform01(gen);
      chan.gains(j, i) = std::polar(amplitude, phase);
      chan.delays(j, i) = d / geom.wave_speed;
    }
  }
  chan.validate();
  return chan;
}

ChannelInstance symmetric_channel(const Eigen::MatrixXd& delays, double direct_power_gain,
                                  double cross_power_gain) {
  const auto k = delays.rows();
  ChannelInstance chan;
  chan.gains = Eigen::MatrixXcd::Constant(k, k, std::sqrt(cross_power_gain));
  chan.gains.diagonal().setConstant(std::sqrt(direct_power_gain));
  chan.delays = delays;
  chan.powers = Eigen::VectorXd::Ones(k);
  chan.validate();
  return chan;
}

DiscretizedDelays discretize(const Eigen::MatrixXd& delays, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidInput("bandwidth must be positive");
  DiscretizedDelays out;
  out.bandwidth = bandwidth;
  out.n.resize(delays.rows(), delays.cols());
  out.delta.resize(delays.rows(), delays.cols());
  for (Eigen::Index j = 0; j < delays.rows(); ++j) {
    for (Eigen::Index i = 0; i < delays.cols(); ++i) {
      const double x = delays(j, i) * bandwidth;
      const double n = std::floor(x + 0.5);
      out.n(j, i) = static_cast<long long>(n);
      out.delta(j, i) = x - n;
    }
  }
  return out;
}

DiscretizedDelays discretize(const ChannelInstance& chan, double bandwidth) {
  return discretize(chan.delays, bandwidth);
}

Eigen::MatrixXd receiver_relative_delays(const ChannelInstance& chan) {
  Eigen::MatrixXd rel = chan.delays;
  for (Eigen::Index j = 0; j < rel.rows(); ++j) rel.row(j).array() -= chan.delays(j, j);
  return rel;
}

namespace {

// sinc(n - 2m + delta) = (-1)^n sin(pi delta) / (pi (n - 2m + delta)); the
// numerator is taken from the parity so that delta = 0 gives exact zeros.
double sinc_numerator(long long n, double delta) {
  const double s = std::sin(std::numbers::pi * delta) / std::numbers::pi;
  return (n % 2 == 0) ? s : -s;
}

void check_leakage_args(double delta, double power, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("series tolerance must be positive");
  if (!(std::abs(delta) <= 0.5)) throw InvalidInput("fractional delay must lie in [-1/2, 1/2]");
  if (!(power >= 0.0)) throw InvalidInput("power must be nonnegative");
}

}  // namespace

namespace {

// Tail of sum_m 1/((2m - a)(2m - b)) over m >= first, valid when 2*first > max(a, b).
// Euler-Maclaurin through the g' term; `bound` receives twice the magnitude of
// the first omitted term, |g'''(first)| / 360. g is completely monotone there,
// so the omitted remainder is no larger than that term.
double upper_tail(double a, double b, double first, double* bound) {
  const double p = 2.0 * first - a;
  const double q = 2.0 * first - b;
  const double g = 1.0 / (p * q);
  const double dg = -2.0 * (p + q) * g * g;
  const double integral = (a == b) ? 1.0 / (2.0 * p) : std::log(q / p) / (2.0 * (a - b));
  double d3 = 0.0;  // |g'''| = 48 sum_j p^-(j+1) q^-(4-j)
  for (int j = 0; j <= 3; ++j) d3 += std::pow(p, -(j + 1)) * std::pow(q, -(4 - j));
  d3 *= 48.0;
  if (bound) *bound = d3 / 360.0;
  return integral + g / 2.0 - dg / 12.0;
}

struct Window {
  long long lo;
  long long hi;
};

Window series_window(long long n1, long long n2, long long half_width) {
  return {std::min(n1, n2) / 2 - half_width - 1, std::max(n1, n2) / 2 + half_width + 1};
}

// Both tails of the reduced series outside the window, and their error bound.
double tails(long long n1, long long n2, double delta, Window w, double* bound) {
  const double a = static_cast<double>(n1) + delta;
  const double b = static_cast<double>(n2) + delta;
  double bu = 0.0;
  double bl = 0.0;
  const double up = upper_tail(a, b, static_cast<double>(w.hi + 1), &bu);
  // m <= lo - 1: with m = -m' the terms read 1/((2m' + a)(2m' + b)).
  const double down = upper_tail(-a, -b, static_cast<double>(-(w.lo - 1)), &bl);
  if (bound) *bound = bu + bl;
  return up + down;
}

}  // namespace

long long leakage_truncation_point(long long n1, long long n2, double delta, double power,
                                   double tol) {
  check_leakage_args(delta, power, tol);
  if (delta == 0.0 || power == 0.0) return 1;
  const double s = 2.0 * power * std::abs(sinc_numerator(n1, delta) * sinc_numerator(n2, delta));
  long long hw = 1;
  for (;;) {
    double bound = 0.0;
    tails(n1, n2, delta, series_window(n1, n2, hw), &bound);
    if (s * bound < tol) return hw;
    hw *= 2;
  }
}

double sinc_leakage_series(long long n1, long long n2, double delta, double power,
                           long long half_width) {
  if (delta == 0.0) {
    // sinc at integers: only the m with n1 = n2 = 2m survives.
    return (n1 == n2 && n1 % 2 == 0) ? 2.0 * power : 0.0;
  }
  const double num = sinc_numerator(n1, delta) * sinc_numerator(n2, delta);
  const Window w = series_window(n1, n2, half_width);
  auto term = [&](long long m) {
    const double x1 = static_cast<double>(n1 - 2 * m) + delta;
    const double x2 = static_cast<double>(n2 - 2 * m) + delta;
    return 1.0 / (x1 * x2);
  };
  // Tail estimate first, then the window from both ends toward the centre so
  // small terms are added first.
  double sum = tails(n1, n2, delta, w, nullptr);
  long long a = w.lo;
  long long b = w.hi;
  while (a < b) {
    sum += term(a++);
    sum += term(b--);
  }
  if (a == b) sum += term(a);
  return 2.0 * power * num * sum;
}

double sinc_leakage_covariance(long long n1, long long n2, double delta, double power,
                               double tol) {
  const long long m = leakage_truncation_point(n1, n2, delta, power, tol);
  return sinc_leakage_series(n1, n2, delta, power, m);
}

Eigen::MatrixXd leakage_coefficients(const ChannelInstance& chan, double bandwidth, double tol) {
  const auto k = chan.users();
  const DiscretizedDelays dd = discretize(receiver_relative_delays(chan), bandwidth);
  const Eigen::MatrixXd g = chan.power_gains();
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      if (i == j || g(j, i) == 0.0) continue;
      // Receiver slot 2t sees x~_i[2t - n_ji]; only the parity of the index matters.
      const long long slot = ((-dd.n(j, i)) % 2 + 2) % 2;
      double delta = dd.delta(j, i);
      coeff(j, i) = g(j, i) * sinc_leakage_covariance(slot, slot, delta, 1.0, tol);
    }
  }
  return coeff;
}

Eigen::VectorXd leaked_interference_power(const ChannelInstance& chan, double bandwidth,
                                          double tol) {
  return leakage_coefficients(chan, bandwidth, tol) * chan.powers;
}

}  // namespace wbs
