#include "dqrb/quat.hpp"

namespace dqrb {

Quat q_log(const Quat& q) {
  double n = q_norm(q);
  if (!(n > 0.0)) throw DegenerateInput("q_log: zero quaternion");
  Quat p = q.w < 0.0 ? q_neg(q) : q;
  return detail::q_log_unchecked(p);
}

Quat q_normalize(const Quat& q) {
  double n = q_norm(q);
  if (!(n > 0.0)) throw DegenerateInput("q_normalize: zero quaternion");
  return q_scale(q, 1.0 / n);
}

bool q_is_unit(const Quat& q, double tol) {
  return std::abs(q_norm(q) - 1.0) <= tol;
}

Quat q_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > kUnitTol)
    throw DegenerateInput("q_from_axis_angle: axis must be unit");
  double h = 0.5 * angle;
  double s = std::sin(h);
  return {std::cos(h), s * axis.x(), s * axis.y(), s * axis.z()};
}

Quat q_rotate_point(const Quat& q, const Quat& p) {
  if (!q_is_unit(q)) throw DegenerateInput("q_rotate_point: q must be unit");
  if (std::abs(p.w) > kUnitTol) throw DegenerateInput("q_rotate_point: p must be pure");
  Quat r = q_mul(q_mul(q, p), q_conj(q));
  return {0.0, r.x, r.y, r.z};  // w vanishes identically for pure p
}

Eigen::Vector3d q_rotate_vec(const Quat& q, const Eigen::Vector3d& v) {
  return q_vec(q_rotate_point(q, q_pure(v)));
}

Eigen::Matrix4d q_matrix_left(const Quat& q) {
  Eigen::Matrix4d m;
  m << q.w, -q.x, -q.y, -q.z,
       q.x,  q.w, -q.z,  q.y,
       q.y,  q.z,  q.w, -q.x,
       q.z, -q.y,  q.x,  q.w;
  return m;
}

Eigen::Matrix4d q_matrix_right(const Quat& q) {
  Eigen::Matrix4d m;
  m << q.w, -q.x, -q.y, -q.z,
       q.x,  q.w,  q.z, -q.y,
       q.y, -q.z,  q.w,  q.x,
       q.z,  q.y, -q.x,  q.w;
  return m;
}

Eigen::Matrix4d q_matrix_left_conj(const Quat& q) {
  Eigen::Matrix4d m;
  m <<  q.w,  q.x,  q.y,  q.z,
       -q.x,  q.w,  q.z, -q.y,
       -q.y, -q.z,  q.w,  q.x,
       -q.z,  q.y, -q.x,  q.w;
  return m;
}

Eigen::Matrix4d q_matrix_right_conj(const Quat& q) {
  Eigen::Matrix4d m;
  m <<  q.w,  q.x,  q.y,  q.z,
       -q.x,  q.w, -q.z,  q.y,
       -q.y,  q.z,  q.w, -q.x,
       -q.z, -q.y,  q.x,  q.w;
  return m;
}

}  // namespace dqrb
