#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "dqrb/dual.hpp"
#include "dqrb/errors.hpp"

namespace dqrb {

// Below this rotation-angle scale the sin/cos ratios switch to Maclaurin
// polynomials; both branches agree to < 1e-12 at the threshold.
inline constexpr double kTaylorThreshold = 1e-4;
// Unit-norm checks throughout the library use this tolerance.
inline constexpr double kUnitTol = 1e-9;

// Quaternion q0 + q1*i + q2*j + q3*k stored as (w, x, y, z).
// T is double for plain quaternions and Dual for dual quaternions: the same
// closed forms and Taylor guards serve both, so exp/log and their dual-part
// derivatives cannot drift apart.
template <class T>
struct QuatT {
  T w{}, x{}, y{}, z{};
};

using Quat = QuatT<double>;

template <class T>
QuatT<T> q_add(const QuatT<T>& p, const QuatT<T>& q) {
  return {p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z};
}

template <class T>
QuatT<T> q_sub(const QuatT<T>& p, const QuatT<T>& q) {
  return {p.w - q.w, p.x - q.x, p.y - q.y, p.z - q.z};
}

template <class T>
QuatT<T> q_neg(const QuatT<T>& q) {
  return {-q.w, -q.x, -q.y, -q.z};
}

template <class T>
QuatT<T> q_scale(const QuatT<T>& q, T s) {
  return {q.w * s, q.x * s, q.y * s, q.z * s};
}

inline Quat q_scale(const Quat& q, double s) {
  return {q.w * s, q.x * s, q.y * s, q.z * s};
}

// Hamilton product (p0q0 - p.q, p0*q + q0*p + p x q).
template <class T>
QuatT<T> q_mul(const QuatT<T>& p, const QuatT<T>& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

template <class T>
QuatT<T> q_conj(const QuatT<T>& q) {
  return {q.w, -q.x, -q.y, -q.z};
}

template <class T>
T q_dot(const QuatT<T>& p, const QuatT<T>& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

template <class T>
T q_norm_sq(const QuatT<T>& q) {
  return q_dot(q, q);
}

template <class T>
T q_norm(const QuatT<T>& q) {
  using std::sqrt;
  return sqrt(q_norm_sq(q));
}

template <class T>
T q_vec_norm(const QuatT<T>& q) {
  using std::sqrt;
  return sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
}

namespace detail {

// sin(phi)/phi, guarded: 1 - phi^2/6 + phi^4/120 - phi^6/5040 near zero.
template <class T>
T sin_phi_over_phi(T phi) {
  using std::sin;
  if (value(phi) < kTaylorThreshold) {
    T p2 = phi * phi;
    return T(1.0) - p2 * (T(1.0 / 6.0) - p2 * (T(1.0 / 120.0) - p2 * T(1.0 / 5040.0)));
  }
  return sin(phi) / phi;
}

// phi/sin(phi), guarded: 1 + phi^2/6 + 7 phi^4/360 + 31 phi^6/15120 near zero.
template <class T>
T phi_over_sin_phi(T phi) {
  using std::sin;
  if (value(phi) < kTaylorThreshold) {
    T p2 = phi * phi;
    return T(1.0) + p2 * (T(1.0 / 6.0) + p2 * (T(7.0 / 360.0) + p2 * T(31.0 / 15120.0)));
  }
  return phi / sin(phi);
}

// Principal-branch log; callers handle branch policy and zero input.
template <class T>
QuatT<T> q_log_unchecked(const QuatT<T>& q) {
  using std::atan2;
  using std::log;
  T n = q_norm(q);
  T r = q_vec_norm(q);
  T phi = atan2(r, q.w);
  // (phi / r) = (phi / sin(phi)) / ||q|| since sin(phi) = r / ||q|| exactly.
  T k = phi_over_sin_phi(phi) / n;
  return {log(n), q.x * k, q.y * k, q.z * k};
}

}  // namespace detail

// exp(q) = e^q0 (cos||v|| + sin||v||/||v|| * v) with v the vector part.
template <class T>
QuatT<T> q_exp(const QuatT<T>& q) {
  using std::cos;
  using std::exp;
  T phi = q_vec_norm(q);
  T s = detail::sin_phi_over_phi(phi);
  T ew = exp(q.w);
  return {ew * cos(phi), ew * s * q.x, ew * s * q.y, ew * s * q.z};
}

// log with the antipodal convention: w < 0 maps to -q first (q and -q encode
// the same rotation), so exp(log(q)) == q is guaranteed for w > 0 only.
Quat q_log(const Quat& q);

Quat q_normalize(const Quat& q);  // DegenerateInput on zero norm

bool q_is_unit(const Quat& q, double tol = kUnitTol);

// Rotation by angle about a unit axis: (cos(a/2), sin(a/2)*n).
Quat q_from_axis_angle(const Eigen::Vector3d& axis, double angle);

// q p q* for unit q and pure p; result is pure by construction.
Quat q_rotate_point(const Quat& q, const Quat& p);
Eigen::Vector3d q_rotate_vec(const Quat& q, const Eigen::Vector3d& v);

inline Quat q_pure(const Eigen::Vector3d& v) { return {0.0, v.x(), v.y(), v.z()}; }
inline Eigen::Vector3d q_vec(const Quat& q) { return {q.x, q.y, q.z}; }
inline Eigen::Vector4d q_to_vec4(const Quat& q) { return {q.w, q.x, q.y, q.z}; }
inline Quat q_from_vec4(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }

// Matrix forms of the Hamilton product: q_mul(p, q) equals
// q_matrix_left(p) * vec4(q) and also q_matrix_right(q) * vec4(p).
Eigen::Matrix4d q_matrix_left(const Quat& q);
Eigen::Matrix4d q_matrix_right(const Quat& q);
// Conjugate variants: matrix forms of q_conj(q), i.e. the transposes above.
Eigen::Matrix4d q_matrix_left_conj(const Quat& q);
Eigen::Matrix4d q_matrix_right_conj(const Quat& q);

}  // namespace dqrb
