#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wbslope/errors.hpp"
#include "wbslope/slope_metrics.hpp"

using namespace wbs;

namespace {

constexpr double kLn2 = std::numbers::ln2;

template <typename F>
RateCurve sample_log_grid(F rate_bits, double lo, double hi, int per_decade) {
  RateCurve c;
  const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
  for (int k = 0; k <= n; ++k) {
    const double s = lo * std::pow(10.0, static_cast<double>(k) / per_decade);
    c.samples.emplace_back(s, rate_bits(s));
  }
  return c;
}

}  // namespace

TEST_CASE("slope from rate derivatives") {
  auto r = slope_from_rate_derivatives(1.0, -1.0);
  CHECK(r.ebno_min_linear == doctest::Approx(kLn2));
  CHECK(r.ebno_min_db == doctest::Approx(-1.592).epsilon(1e-3));
  CHECK(r.s0 == doctest::Approx(2.0));
  CHECK(!r.delta_s0.has_value());
  CHECK(slope_from_rate_derivatives(1.0, -2.0).s0 == doctest::Approx(1.0));
  CHECK_THROWS_AS(slope_from_rate_derivatives(1.0, 0.0), DegenerateError);
  CHECK_THROWS_AS(slope_from_rate_derivatives(1.0, 0.5), DegenerateError);
  CHECK_THROWS_AS(slope_from_rate_derivatives(0.0, -1.0), InvalidInput);
}

TEST_CASE("single-user time sharing law through jets") {
  // 0.5 ln(1 + 2 snr): R'(0) = 1, R''(0) = -2.
  const auto t = Taylor2<double>::variable();
  const auto rate = 0.5 * log(1.0 + 2.0 * t);
  CHECK(rate.first_derivative() == doctest::Approx(1.0));
  CHECK(rate.second_derivative() == doctest::Approx(-2.0));
  CHECK(slope_from_rate_taylor(rate).s0 == doctest::Approx(1.0));
}

TEST_CASE("slope from power derivatives") {
  // snr(R) = 2^R - 1.
  const auto r = slope_from_power_derivatives(kLn2, kLn2 * kLn2);
  CHECK(r.ebno_min_linear == doctest::Approx(kLn2));
  CHECK(r.s0 == doctest::Approx(2.0));
  CHECK_THROWS_AS(slope_from_power_derivatives(1.0, 0.0), DegenerateError);
  CHECK_THROWS_AS(slope_from_power_derivatives(0.0, 1.0), InvalidInput);
}

TEST_CASE("duality between the two derivative routes") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    // Inverse law snr(R), R in bits, with derivatives p1, p2 at 0. Inverse
    // function rule: R'(s) = 1/p1, R''(s) = -p2/p1^3, both in bits.
    const double p1 = u(gen);
    const double p2 = u(gen);
    const auto a = slope_from_power_derivatives(p1, p2);
    const auto b = slope_from_rate_derivatives(kLn2 / p1, -kLn2 * p2 / (p1 * p1 * p1));
    CHECK(std::abs(a.s0 - b.s0) <= 1e-9 * a.s0);
    CHECK(std::abs(a.ebno_min_linear - b.ebno_min_linear) <= 1e-9 * a.ebno_min_linear);
  }
  // A concrete smooth law: R(s) = ln(1 + s) + 0.3 ln(1 + 2s) in nats, inverted through jets.
  const auto t = Taylor2<double>::variable();
  const auto fwd = log(1.0 + t) + 0.3 * log(1.0 + 2.0 * t);
  const double r1 = fwd.first_derivative();
  const double r2 = fwd.second_derivative();
  // s(R_bits): ds/dR = ln2 / r1, d2s/dR2 = -ln2^2 r2 / r1^3.
  const auto inv = slope_from_power_derivatives(kLn2 / r1, -kLn2 * kLn2 * r2 / (r1 * r1 * r1));
  const auto direct = slope_from_rate_taylor(fwd);
  CHECK(std::abs(inv.s0 - direct.s0) <= 1e-9 * direct.s0);
}

TEST_CASE("numeric estimate: AWGN") {
  const auto c = sample_log_grid([](double s) { return std::log2(1.0 + s); }, 1e-5, 1e-2, 10);
  const auto r = numeric_slope_estimate(c);
  CHECK(std::abs(r.s0 - 2.0) < 1e-3);
  CHECK(std::abs(r.ebno_min_db - 10.0 * std::log10(kLn2)) < 0.01);
  CHECK(r.error_estimate < 1e-3);
  CHECK(r.error_estimate >= std::abs(r.s0 - 2.0));
}

TEST_CASE("numeric estimate: symmetric TIN sum rate at a = 0.2") {
  const double a = 0.2;
  const auto c = sample_log_grid(
      [a](double s) { return 2.0 * std::log2(1.0 + (s / 2.0) / (1.0 + a * s / 2.0)); }, 1e-5, 1e-2,
      10);
  CHECK(std::abs(numeric_slope_estimate(c).s0 - 4.0 / 1.4) < 1e-3);
}

TEST_CASE("numeric estimate: single link at fixed leakage coefficient") {
  // R = 0.5 log2(1 + 2 g s / (1 + lambda s)): R'(0) = g, R''(0) = -2(g^2 + g lambda) in nats.
  const double g = 0.7;
  const double lambda = 0.35;
  const auto c = sample_log_grid(
      [&](double s) { return 0.5 * std::log2(1.0 + 2.0 * g * s / (1.0 + lambda * s)); }, 1e-6,
      1e-2, 8);
  const auto r = numeric_slope_estimate(c);
  const auto want = slope_from_rate_derivatives(g, -2.0 * (g * g + g * lambda));
  CHECK(std::abs(r.s0 - want.s0) <= 1e-6 * want.s0);
  CHECK(std::abs(r.ebno_min_linear - want.ebno_min_linear) <= 1e-6 * want.ebno_min_linear);
}

TEST_CASE("numeric estimate: refining the grid stays within the error estimate") {
  auto law = [](double s) { return std::log2(1.0 + s) + 0.5 * std::log2(1.0 + 3.0 * s); };
  for (double lo : {1e-5, 1e-4, 1e-3 / 2.0}) {
    const auto coarse = numeric_slope_estimate(sample_log_grid(law, lo, 1e-2, 12));
    auto fine_curve = sample_log_grid(law, lo, 1e-2, 12);
    fine_curve.samples.insert(fine_curve.samples.begin(), {lo / 2.0, law(lo / 2.0)});
    const auto fine = numeric_slope_estimate(fine_curve);
    CHECK(std::abs(fine.s0 - coarse.s0) < coarse.error_estimate);
  }
}

TEST_CASE("numeric estimate: input checks") {
  RateCurve few;
  for (double s : {1e-4, 1e-3, 5e-3, 0.1, 0.2, 0.3, 0.4})
    few.samples.emplace_back(s, std::log2(1.0 + s));
  CHECK_THROWS_AS(numeric_slope_estimate(few), ResolutionError);
  RateCurve bad;
  bad.samples = {{1e-3, 0.1}, {1e-3, 0.2}};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.samples = {{0.0, 0.0}, {1e-3, 0.2}};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.samples = {{1e-3, 0.2}, {2e-3, 0.1}};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("minimum energy per bit closed forms") {
  CHECK(ebnomin_closed_form(Eigen::Vector2d(1, 1), ConstraintKind::EqualPower) ==
        doctest::Approx(kLn2));
  CHECK(ebnomin_closed_form(Eigen::Vector2d(1, 1), ConstraintKind::EqualRate) ==
        doctest::Approx(kLn2));
  const Eigen::Vector3d g(1, 2, 4);
  CHECK(ebnomin_closed_form(g, ConstraintKind::EqualPower) == doctest::Approx(3.0 * kLn2 / 7.0));
  CHECK(ebnomin_closed_form(g, ConstraintKind::EqualRate) ==
        doctest::Approx(kLn2 * 1.75 / 3.0));
  CHECK_THROWS_AS(ebnomin_closed_form(Eigen::Vector2d(1, 0), ConstraintKind::EqualRate),
                  InvalidInput);
}

TEST_CASE("interference-free slopes") {
  CHECK(interference_free_slope(Eigen::VectorXd::Ones(5), ConstraintKind::EqualPower) ==
        doctest::Approx(10.0));
  CHECK(interference_free_slope(Eigen::Vector2d(1, 3), ConstraintKind::EqualPower) ==
        doctest::Approx(3.2));
  CHECK(interference_free_slope(Eigen::Vector3d(1, 7, 0.2), ConstraintKind::EqualRate) == 6.0);
}

TEST_CASE("normalisation against the interference-free baseline") {
  const Eigen::Vector2d g(1, 3);
  SlopeResult r;
  r.s0 = interference_free_slope(g, ConstraintKind::EqualPower);
  CHECK(*normalized(r, r.s0).delta_s0 == 1.0);
  r.s0 = 1.6;
  CHECK(*normalized(r, 3.2).delta_s0 == doctest::Approx(0.5));
  CHECK_THROWS_AS(normalized(r, 0.0), InvalidInput);
}

TEST_CASE("constraint names") {
  CHECK(parse_constraint("equal-power") == ConstraintKind::EqualPower);
  CHECK(parse_constraint("EqualRate") == ConstraintKind::EqualRate);
  CHECK(parse_constraint("equal_rate") == ConstraintKind::EqualRate);
  CHECK(to_string(ConstraintKind::EqualPower) == "equal-power");
  CHECK_THROWS_AS(parse_constraint("fair"), InvalidInput);
}
