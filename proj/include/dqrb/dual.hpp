#pragma once

#include <cmath>

namespace dqrb {

// Dual number a + eps*b with eps^2 = 0, stored as (re, du).
// Evaluating a real closed form on Dual arguments yields the value in .re and
// the exact directional derivative in .du, which is what turns the quaternion
// exp/log templates into the dual-quaternion exp/log.
struct Dual {
  double re = 0.0;
  double du = 0.0;

  Dual() = default;
  Dual(double r) : re(r) {}  // scalars lift to (r, 0)
  Dual(double r, double d) : re(r), du(d) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.re + b.re, a.du + b.du}; }
inline Dual operator-(Dual a, Dual b) { return {a.re - b.re, a.du - b.du}; }
inline Dual operator-(Dual a) { return {-a.re, -a.du}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.re * b.re, a.re * b.du + a.du * b.re};
}
inline Dual operator/(Dual a, Dual b) {
  return {a.re / b.re, (a.du * b.re - a.re * b.du) / (b.re * b.re)};
}
inline Dual& operator+=(Dual& a, Dual b) { return a = a + b; }
inline Dual& operator-=(Dual& a, Dual b) { return a = a - b; }
inline Dual& operator*=(Dual& a, Dual b) { return a = a * b; }
inline Dual& operator/=(Dual& a, Dual b) { return a = a / b; }

// Ordering compares values only; the dual part is infinitesimal.
inline bool operator<(Dual a, Dual b) { return a.re < b.re; }
inline bool operator>(Dual a, Dual b) { return a.re > b.re; }
inline bool operator<=(Dual a, Dual b) { return a.re <= b.re; }
inline bool operator>=(Dual a, Dual b) { return a.re >= b.re; }

inline Dual sqrt(Dual x) {
  // Sums of squares hit zero with zero derivative; the branch keeps that case
  // finite instead of producing 0/0.
  if (x.re == 0.0) return {0.0, 0.0};
  double r = std::sqrt(x.re);
  return {r, x.du / (2.0 * r)};
}
inline Dual exp(Dual x) {
  double e = std::exp(x.re);
  return {e, x.du * e};
}
inline Dual log(Dual x) { return {std::log(x.re), x.du / x.re}; }
inline Dual sin(Dual x) { return {std::sin(x.re), x.du * std::cos(x.re)}; }
inline Dual cos(Dual x) { return {std::cos(x.re), -x.du * std::sin(x.re)}; }
inline Dual atan2(Dual y, Dual x) {
  double d = x.re * x.re + y.re * y.re;
  return {std::atan2(y.re, x.re), (x.re * y.du - y.re * x.du) / d};
}

inline double value(Dual x) { return x.re; }
inline double value(double x) { return x; }

}  // namespace dqrb
