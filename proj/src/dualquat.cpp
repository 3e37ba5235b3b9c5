#include "dqrb/dualquat.hpp"

namespace dqrb {

Dual dq_norm(const DualQuaternion& q) {
  double n = q_norm(q.real);
  if (!(n > 0.0)) return {0.0, 0.0};
  return {n, q_dot(q.real, q.dual) / n};
}

Dual dq_norm_sq(const DualQuaternion& q) {
  return {q_norm_sq(q.real), 2.0 * q_dot(q.real, q.dual)};
}

bool dq_is_unit(const DualQuaternion& q, double tol) {
  return std::abs(q_norm(q.real) - 1.0) <= tol &&
         std::abs(q_dot(q.real, q.dual)) <= tol;
}

DualQuaternion dq_normalize(const DualQuaternion& q) {
  double n = q_norm(q.real);
  if (!(n > 0.0)) throw DegenerateInput("dq_normalize: zero real part");
  Quat r = q_scale(q.real, 1.0 / n);
  Quat d = q_sub(q.dual, q_scale(r, q_dot(r, q.dual)));
  return {r, d};
}

DualQuaternion dq_error(const DualQuaternion& p, const DualQuaternion& q) {
  if (!dq_is_unit(p) || !dq_is_unit(q))
    throw DegenerateInput("dq_error: inputs must be unit dual quaternions");
  return dq_mul(dq_conj(p), q);
}

namespace {

Mat8 blocks(const Eigen::Matrix4d& real, const Eigen::Matrix4d& dual) {
  Mat8 m = Mat8::Zero();
  m.topLeftCorner<4, 4>() = real;
  m.bottomRightCorner<4, 4>() = real;
  m.bottomLeftCorner<4, 4>() = dual;
  return m;
}

QuatT<Dual> to_dual_scalars(const DualQuaternion& q) {
  return {{q.real.w, q.dual.w},
          {q.real.x, q.dual.x},
          {q.real.y, q.dual.y},
          {q.real.z, q.dual.z}};
}

DualQuaternion from_dual_scalars(const QuatT<Dual>& q) {
  return {{q.w.re, q.x.re, q.y.re, q.z.re}, {q.w.du, q.x.du, q.y.du, q.z.du}};
}

}  // namespace

Mat8 dq_matrix_left(const DualQuaternion& q) {
  return blocks(q_matrix_left(q.real), q_matrix_left(q.dual));
}

Mat8 dq_matrix_right(const DualQuaternion& q) {
  return blocks(q_matrix_right(q.real), q_matrix_right(q.dual));
}

Mat8 dq_matrix_left_conj(const DualQuaternion& q) {
  return blocks(q_matrix_left_conj(q.real), q_matrix_left_conj(q.dual));
}

Mat8 dq_matrix_right_conj(const DualQuaternion& q) {
  return blocks(q_matrix_right_conj(q.real), q_matrix_right_conj(q.dual));
}

Mat8 dq_matrix_left_dual_conj(const DualQuaternion& q) {
  return blocks(q_matrix_left_conj(q.real), -q_matrix_left_conj(q.dual));
}

Mat8 dq_matrix_right_dual_conj(const DualQuaternion& q) {
  return blocks(q_matrix_right_conj(q.real), -q_matrix_right_conj(q.dual));
}

DualQuaternion dq_exp(const DualQuaternion& q) {
  return from_dual_scalars(q_exp(to_dual_scalars(q)));
}

DualQuaternion dq_log(const DualQuaternion& q) {
  if (!(q.real.w > 0.0))
    throw BranchCut("dq_log: real part w must be positive (principal branch)");
  return from_dual_scalars(detail::q_log_unchecked(to_dual_scalars(q)));
}

DualQuaternion dq_from_rot_trans(const Quat& rotation, const Eigen::Vector3d& translation) {
  if (!q_is_unit(rotation))
    throw DegenerateInput("dq_from_rot_trans: rotation must be unit");
  Quat t = q_pure(translation);
  return {rotation, q_scale(q_mul(t, rotation), 0.5)};
}

DualQuaternion dq_from_trans_rot(const Quat& rotation, const Eigen::Vector3d& translation) {
  if (!q_is_unit(rotation))
    throw DegenerateInput("dq_from_trans_rot: rotation must be unit");
  Quat t = q_pure(translation);
  return {rotation, q_scale(q_mul(rotation, t), 0.5)};
}

Eigen::Vector3d dq_extract_translation(const DualQuaternion& q,
                                       TranslationConvention convention) {
  if (!dq_is_unit(q))
    throw DegenerateInput("dq_extract_translation: pose must be unit");
  Quat t = convention == TranslationConvention::kRotTrans
               ? q_mul(q.dual, q_conj(q.real))
               : q_mul(q_conj(q.real), q.dual);
  return 2.0 * q_vec(t);
}

Eigen::Vector3d dq_transform_point(const DualQuaternion& q, const Eigen::Vector3d& p) {
  if (!dq_is_unit(q))
    throw DegenerateInput("dq_transform_point: transform must be unit");
  DualQuaternion pd{{1.0, 0.0, 0.0, 0.0}, q_pure(p)};
  DualQuaternion r = dq_mul(dq_mul(q, pd), dq_dual_conj(q));
  return q_vec(r.dual);
}

}  // namespace dqrb
