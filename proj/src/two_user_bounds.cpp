#include "wbslope/two_user_bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wbslope/errors.hpp"
#include "wbslope/taylor.hpp"

namespace wbs {

using Jet = Taylor2<double>;

TwoUserGains TwoUserGains::from_channel(const ChannelInstance& chan) {
  if (chan.users() != 2) throw InvalidInput("expected a 2-user channel");
  const Eigen::MatrixXd g = chan.power_gains();
  return {g(0, 0), g(0, 1), g(1, 0), g(1, 1)};
}

void TwoUserGains::validate() const {
  if (!(g11 > 0.0) || !(g22 > 0.0) || !std::isfinite(g11) || !std::isfinite(g22))
    throw InvalidInput("direct gains must be positive and finite");
  if (!(g12 >= 0.0) || !(g21 >= 0.0) || !std::isfinite(g12) || !std::isfinite(g21))
    throw InvalidInput("cross gains must be nonnegative and finite");
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::TIN: return "TIN";
    case BoundKind::TDMA: return "TDMA";
    case BoundKind::InterferenceDecoding: return "InterferenceDecoding";
    case BoundKind::KramerEqualPower: return "KramerEqualPower";
    case BoundKind::KramerEqualRate: return "KramerEqualRate";
    case BoundKind::NoisyExact: return "NoisyExact";
    case BoundKind::InterferenceFree: return "InterferenceFree";
  }
  return "unknown";
}

namespace {

constexpr double kEbnoTolerance = 1e-9;

// Fills s0/ebno from a jet and checks that the minimum energy per bit agrees
// with the closed form for the constraint; a bound that misses it is not
// informative about the slope.
BoundRecord record_from(BoundKind bk, const SlopeResult& r, double ebno_ref, std::string detail) {
  BoundRecord rec;
  rec.kind = bk;
  rec.condition_detail = std::move(detail);
  if (std::abs(r.ebno_min_linear - ebno_ref) > kEbnoTolerance * ebno_ref) {
    rec.condition_detail += "; Eb/N0 min differs from the channel value";
    return rec;
  }
  rec.valid = true;
  rec.s0 = r.s0;
  rec.ebno_min_linear = r.ebno_min_linear;
  return rec;
}

BoundRecord invalid(BoundKind bk, std::string detail) {
  BoundRecord rec;
  rec.kind = bk;
  rec.condition_detail = std::move(detail);
  return rec;
}

Eigen::VectorXd direct(const TwoUserGains& g) { return Eigen::Vector2d(g.g11, g.g22); }

// 2^(t * scale) as a jet in t.
Jet pow2(const Jet& t, double scale) { return exp(t * (scale * std::numbers::ln2)); }

struct Receivers {
  bool decode1;  // receiver 1 decodes and removes user 2
  bool decode2;
};

// Sum rate in nats at total snr s (equal power, s/2 each).
Jet equal_power_rate(const TwoUserGains& g, Receivers rx) {
  const Jet p = Jet::variable() * 0.5;
  const Jet i1 = rx.decode1 ? Jet(0.0) : p * g.g12;
  const Jet i2 = rx.decode2 ? Jet(0.0) : p * g.g21;
  return log(1.0 + p * g.g11 / (1.0 + i1)) + log(1.0 + p * g.g22 / (1.0 + i2));
}

// Total snr needed for sum rate t (bits) split equally.
Jet equal_rate_power(const TwoUserGains& g, Receivers rx) {
  const Jet y = pow2(Jet::variable(), 0.5) - 1.0;
  // [g11, -y g12; -y g21, g22] p = y 1, with the off-diagonal dropped where decoded.
  const Jet m12 = rx.decode1 ? Jet(0.0) : -y * g.g12;
  const Jet m21 = rx.decode2 ? Jet(0.0) : -y * g.g21;
  const Jet det = g.g11 * g.g22 - m12 * m21;
  const Jet p1 = (y * g.g22 - m12 * y) / det;
  const Jet p2 = (g.g11 * y - m21 * y) / det;
  return p1 + p2;
}

SlopeResult tdma_slope(const TwoUserGains& g, ConstraintKind kind) {
  const Jet t = Jet::variable();
  if (kind == ConstraintKind::EqualPower) {
    // Half the time each at twice the power.
    return slope_from_rate_taylor(0.5 * log(1.0 + t * g.g11) + 0.5 * log(1.0 + t * g.g22));
  }
  // Each user carries t/2 bits in half the time: 2 g p = 2^t - 1.
  const Jet y = pow2(t, 1.0) - 1.0;
  return slope_from_power_taylor(y * (0.5 / g.g11) + y * (0.5 / g.g22));
}

}  // namespace

BoundRecord scheme_slope(const TwoUserGains& g, BoundKind scheme, ConstraintKind kind) {
  g.validate();
  const double ebno_ref = ebnomin_closed_form(direct(g), kind);
  switch (scheme) {
    case BoundKind::TDMA:
      return record_from(scheme, tdma_slope(g, kind), ebno_ref, "orthogonal time slots");
    case BoundKind::TIN:
    case BoundKind::InterferenceDecoding: {
      Receivers rx{false, false};
      std::string detail = "both receivers treat interference as noise";
      if (scheme == BoundKind::InterferenceDecoding) {
        rx = {g.g12 > g.g22, g.g21 > g.g11};
        if (!rx.decode1 && !rx.decode2)
          return invalid(scheme, "needs g12 > g22 or g21 > g11 (strong interference)");
        detail = std::string("receiver 1 ") + (rx.decode1 ? "decodes" : "treats as noise") +
                 ", receiver 2 " + (rx.decode2 ? "decodes" : "treats as noise");
      }
      const SlopeResult r = kind == ConstraintKind::EqualPower
                                ? slope_from_rate_taylor(equal_power_rate(g, rx))
                                : slope_from_power_taylor(equal_rate_power(g, rx));
      return record_from(scheme, r, ebno_ref, detail);
    }
    default:
      throw InvalidInput("not an achievable scheme: " + to_string(scheme));
  }
}

BoundRecord inner_bound_slope(const TwoUserGains& g, ConstraintKind kind) {
  BoundRecord best;
  for (BoundKind s : {BoundKind::InterferenceDecoding, BoundKind::TIN, BoundKind::TDMA}) {
    BoundRecord r = scheme_slope(g, s, kind);
    if (r.valid && (!best.valid || *r.s0 > *best.s0)) best = std::move(r);
  }
  return best;
}

BoundRecord kramer_outer_equal_power(const TwoUserGains& g) {
  g.validate();
  const double ebno_ref = ebnomin_closed_form(direct(g), ConstraintKind::EqualPower);
  const Jet p = Jet::variable() * 0.5;
  BoundRecord best = invalid(BoundKind::KramerEqualPower, "needs g21 < g11 or g12 < g22");
  auto consider = [&](double gdirect_weak, double gcross, double gother, const char* detail) {
    // Sum bound with the weak direction's cross gain feeding the other receiver.
    const Jet rate = log(1.0 + p * gdirect_weak) + log(1.0 + p * gother / (1.0 + p * gcross));
    BoundRecord r =
        record_from(BoundKind::KramerEqualPower, slope_from_rate_taylor(rate), ebno_ref, detail);
    if (r.valid && (!best.valid || *r.s0 < *best.s0)) best = std::move(r);
  };
  if (g.g21 < g.g11) consider(g.g11, g.g21, g.g22, "g21 < g11");
  if (g.g12 < g.g22) consider(g.g22, g.g12, g.g11, "g12 < g22");
  return best;
}

namespace {

enum class Vertex { Interior, X1FromRow1, X1FromRow2, X2FromRow1, X2FromRow2, Origin };

struct LpSolution {
  Vertex vertex;
  double x1;
  double x2;
};

// min x1 + x2 s.t. g21 x1 + g22 x2 >= b1, g11 x1 + g12 x2 >= b2, x >= 0, by
// enumerating the vertices of the feasible polygon.
LpSolution solve_lp(const TwoUserGains& g, double b1, double b2) {
  std::vector<LpSolution> cand;
  const double det = g.g21 * g.g12 - g.g22 * g.g11;
  if (det != 0.0)
    cand.push_back({Vertex::Interior, (b1 * g.g12 - g.g22 * b2) / det,
                    (g.g21 * b2 - g.g11 * b1) / det});
  if (g.g21 > 0.0) cand.push_back({Vertex::X1FromRow1, b1 / g.g21, 0.0});
  cand.push_back({Vertex::X1FromRow2, b2 / g.g11, 0.0});
  cand.push_back({Vertex::X2FromRow1, 0.0, b1 / g.g22});
  if (g.g12 > 0.0) cand.push_back({Vertex::X2FromRow2, 0.0, b2 / g.g12});
  cand.push_back({Vertex::Origin, 0.0, 0.0});

  const double scale = std::max({std::abs(b1), std::abs(b2), 1e-300});
  const double tol = 1e-12 * scale;
  LpSolution best{Vertex::Origin, std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& c : cand) {
    const bool feasible = c.x1 >= -tol && c.x2 >= -tol &&
                          g.g21 * c.x1 + g.g22 * c.x2 >= b1 - tol &&
                          g.g11 * c.x1 + g.g12 * c.x2 >= b2 - tol;
    if (!feasible) continue;
    // Prefer the interior vertex on ties (listed first).
    if (c.x1 + c.x2 < best.x1 + best.x2 - tol) best = c;
  }
  if (!std::isfinite(best.x1)) throw DegenerateError("Kramer rate LP is infeasible");
  return best;
}

template <typename T>
std::array<T, 2> kramer_rhs(const TwoUserGains& g, const T& x) {
  const double alpha = g.g21 / g.g11;
  const double beta = g.g12 / g.g22;
  return {x * (alpha * x - alpha + 1.0) - 1.0, x * (beta * x - beta + 1.0) - 1.0};
}

Jet vertex_sum(const TwoUserGains& g, Vertex v, const std::array<Jet, 2>& b) {
  switch (v) {
    case Vertex::Interior: {
      const double det = g.g21 * g.g12 - g.g22 * g.g11;
      return (b[0] * g.g12 - b[1] * g.g22 + b[1] * g.g21 - b[0] * g.g11) / Jet(det);
    }
    case Vertex::X1FromRow1: return b[0] / Jet(g.g21);
    case Vertex::X1FromRow2: return b[1] / Jet(g.g11);
    case Vertex::X2FromRow1: return b[0] / Jet(g.g22);
    case Vertex::X2FromRow2: return b[1] / Jet(g.g12);
    case Vertex::Origin: return Jet(0.0);
  }
  return Jet(0.0);
}

}  // namespace

KramerRateLp kramer_equal_rate_lp(const TwoUserGains& g, double sum_rate_bits) {
  g.validate();
  if (!(sum_rate_bits >= 0.0)) throw InvalidInput("sum rate must be nonnegative");
  if (!(g.g21 < g.g11 && g.g12 < g.g22)) throw InvalidInput("both links must be weak");
  const auto b = kramer_rhs(g, std::exp2(sum_rate_bits / 2.0));
  const LpSolution s = solve_lp(g, b[0], b[1]);
  return {s.x1, s.x2, s.vertex == Vertex::Interior};
}

BoundRecord kramer_outer_equal_rate(const TwoUserGains& g) {
  g.validate();
  if (!(g.g21 < g.g11 && g.g12 < g.g22))
    return invalid(BoundKind::KramerEqualRate, "needs g21 < g11 and g12 < g22");
  const double ebno_ref = ebnomin_closed_form(direct(g), ConstraintKind::EqualRate);
  const auto b = kramer_rhs(g, pow2(Jet::variable(), 0.5));
  // The optimal vertex at vanishing rate is fixed by the first-order right-hand side.
  const LpSolution first = solve_lp(g, b[0].c1, b[1].c1);
  const Jet snr = vertex_sum(g, first.vertex, b);
  std::ostringstream detail;
  detail << "both links weak; LP optimum at "
         << (first.vertex == Vertex::Interior ? "A^-1 b" : "an axis vertex");
  return record_from(BoundKind::KramerEqualRate, slope_from_power_taylor(snr), ebno_ref,
                     detail.str());
}

double kramer_equal_rate_closed_form(const TwoUserGains& g) {
  const double alpha = g.g21 / g.g11;
  const double beta = g.g12 / g.g22;
  const double s = g.g11 + g.g22;
  return 4.0 * s * (1.0 - alpha * beta) /
         (s + g.g21 * (2.0 - 3.0 * beta) + g.g12 * (2.0 - 3.0 * alpha));
}

BoundRecord noisy_interference(const TwoUserGains& g, double snr1, double snr2) {
  g.validate();
  if (!(snr1 >= 0.0) || !(snr2 >= 0.0)) throw InvalidInput("snr must be nonnegative");
  const double lhs = std::sqrt(g.g12 / g.g22) * (1.0 + g.g21 * snr1) +
                     std::sqrt(g.g21 / g.g11) * (1.0 + g.g12 * snr2);
  std::ostringstream detail;
  detail << "noisy-interference condition value " << lhs << " (needs <= 1)";
  if (!(lhs <= 1.0)) return invalid(BoundKind::NoisyExact, detail.str());
  BoundRecord rec;
  rec.kind = BoundKind::NoisyExact;
  rec.valid = true;
  rec.condition_detail = detail.str();
  const double s = g.g11 + g.g22;
  rec.s0 = 2.0 * s * s /
           (g.g11 * g.g11 + g.g22 * g.g22 + 2.0 * (g.g11 * g.g12 + g.g21 * g.g22));
  rec.ebno_min_linear = ebnomin_closed_form(direct(g), ConstraintKind::EqualPower);
  return rec;
}

BoundRecord outer_bound_slope(const TwoUserGains& g, ConstraintKind kind) {
  g.validate();
  BoundRecord best;
  best.kind = BoundKind::InterferenceFree;
  best.valid = true;
  best.s0 = interference_free_slope(direct(g), kind);
  best.ebno_min_linear = ebnomin_closed_form(direct(g), kind);
  best.condition_detail = "interference removed by a genie";
  auto consider = [&](BoundRecord r) {
    if (r.valid && *r.s0 < *best.s0) best = std::move(r);
  };
  if (kind == ConstraintKind::EqualPower) {
    consider(kramer_outer_equal_power(g));
    consider(noisy_interference(g, 0.0, 0.0));
  } else {
    consider(kramer_outer_equal_rate(g));
  }
  return best;
}

std::vector<Fig2Row> fig2_sweep(const std::vector<double>& a_grid, ConstraintKind kind) {
  std::vector<Fig2Row> rows;
  rows.reserve(a_grid.size());
  for (double a : a_grid) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("grid values must be positive");
    const TwoUserGains g = TwoUserGains::symmetric(a);
    Fig2Row row;
    row.a = a;
    const BoundRecord inner = inner_bound_slope(g, kind);
    row.inner_s0 = *inner.s0;
    row.inner_scheme = inner.kind;
    if (a < 1.0) {
      const BoundRecord k = kind == ConstraintKind::EqualPower ? kramer_outer_equal_power(g)
                                                               : kramer_outer_equal_rate(g);
      if (k.valid) row.kramer_s0 = k.s0;
      row.outer_s0 = outer_bound_slope(g, kind).s0;
    } else if (a > 1.0) {
      row.outer_s0 = interference_free_slope(direct(g), kind);
    }
    row.exact = row.outer_s0 && std::abs(*row.outer_s0 - row.inner_s0) <= 1e-9 * row.inner_s0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wbs
