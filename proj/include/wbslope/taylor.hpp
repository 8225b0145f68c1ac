#pragma once

#include <cmath>

namespace wbs {

/// Second-order truncated Taylor polynomial c0 + c1*t + c2*t^2 about t = 0.
///
/// Arithmetic propagates the first two derivatives exactly, so a rate or power
/// law written once as a template can be evaluated either on plain scalars or
/// on Taylor2 to obtain R(0), R'(0) and R''(0) = 2*c2 without finite
/// differences.
template <typename Scalar>
struct Taylor2 {
  Scalar c0{0};
  Scalar c1{0};
  Scalar c2{0};

  constexpr Taylor2() = default;
  constexpr Taylor2(Scalar v) : c0(v) {}  // NOLINT: implicit lift of constants
  constexpr Taylor2(Scalar v0, Scalar v1, Scalar v2) : c0(v0), c1(v1), c2(v2) {}

  /// The independent variable t itself.
  static constexpr Taylor2 variable() { return {Scalar(0), Scalar(1), Scalar(0)}; }

  constexpr Scalar value() const { return c0; }
  constexpr Scalar first_derivative() const { return c1; }
  constexpr Scalar second_derivative() const { return Scalar(2) * c2; }

  constexpr Taylor2& operator+=(const Taylor2& o) {
    c0 += o.c0;
    c1 += o.c1;
    c2 += o.c2;
    return *this;
  }
  constexpr Taylor2& operator-=(const Taylor2& o) {
    c0 -= o.c0;
    c1 -= o.c1;
    c2 -= o.c2;
    return *this;
  }
  constexpr Taylor2& operator*=(const Taylor2& o) { return *this = *this * o; }
  constexpr Taylor2& operator/=(const Taylor2& o) { return *this = *this / o; }

  friend constexpr Taylor2 operator-(const Taylor2& a) { return {-a.c0, -a.c1, -a.c2}; }
  friend constexpr Taylor2 operator+(Taylor2 a, const Taylor2& b) { return a += b; }
  friend constexpr Taylor2 operator-(Taylor2 a, const Taylor2& b) { return a -= b; }
  friend constexpr Taylor2 operator*(const Taylor2& a, const Taylor2& b) {
    return {a.c0 * b.c0, a.c0 * b.c1 + a.c1 * b.c0, a.c0 * b.c2 + a.c1 * b.c1 + a.c2 * b.c0};
  }
  friend constexpr Taylor2 operator/(const Taylor2& a, const Taylor2& b) {
    // q = a / b, solved order by order from a = q * b.
    const Scalar q0 = a.c0 / b.c0;
    const Scalar q1 = (a.c1 - q0 * b.c1) / b.c0;
    const Scalar q2 = (a.c2 - q0 * b.c2 - q1 * b.c1) / b.c0;
    return {q0, q1, q2};
  }
};

template <typename Scalar>
Taylor2<Scalar> log(const Taylor2<Scalar>& a) {
  using std::log;
  const Scalar r1 = a.c1 / a.c0;
  return {log(a.c0), r1, a.c2 / a.c0 - r1 * r1 / Scalar(2)};
}

template <typename Scalar>
Taylor2<Scalar> exp(const Taylor2<Scalar>& a) {
  using std::exp;
  const Scalar e = exp(a.c0);
  return {e, e * a.c1, e * (a.c2 + a.c1 * a.c1 / Scalar(2))};
}

/// log(1 + a); kept separate so scalar instantiations use std::log1p.
template <typename Scalar>
Taylor2<Scalar> log1p(const Taylor2<Scalar>& a) {
  return log(Taylor2<Scalar>(Scalar(1)) + a);
}

}  // namespace wbs
