#pragma once

#include <Eigen/Dense>

#include "dqrb/quat.hpp"

namespace dqrb {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Dual quaternion real + eps*dual. Unit dual quaternions encode rigid
// transforms; the invariant is ||real|| == 1 and dot(real, dual) == 0.
struct DualQuaternion {
  Quat real{1.0, 0.0, 0.0, 0.0};
  Quat dual{0.0, 0.0, 0.0, 0.0};
};

inline DualQuaternion dq_identity() { return {}; }

inline DualQuaternion dq_add(const DualQuaternion& p, const DualQuaternion& q) {
  return {q_add(p.real, q.real), q_add(p.dual, q.dual)};
}

inline DualQuaternion dq_sub(const DualQuaternion& p, const DualQuaternion& q) {
  return {q_sub(p.real, q.real), q_sub(p.dual, q.dual)};
}

inline DualQuaternion dq_scale(const DualQuaternion& q, double s) {
  return {q_scale(q.real, s), q_scale(q.dual, s)};
}

// P Q + eps (P Qeps + Peps Q)
inline DualQuaternion dq_mul(const DualQuaternion& p, const DualQuaternion& q) {
  return {q_mul(p.real, q.real),
          q_add(q_mul(p.real, q.dual), q_mul(p.dual, q.real))};
}

// Quaternion conjugate of both parts: Q* + eps Qeps*.
inline DualQuaternion dq_conj(const DualQuaternion& q) {
  return {q_conj(q.real), q_conj(q.dual)};
}

// Combined quaternion + dual-number conjugate: Q* - eps Qeps*. This is the
// conjugate that appears in point transforms Qd Pd dq_dual_conj(Qd).
inline DualQuaternion dq_dual_conj(const DualQuaternion& q) {
  return {q_conj(q.real), q_neg(q_conj(q.dual))};
}

// Norm as a dual number (||Q||, dot(Q, Qeps)/||Q||); (0, 0) for zero real part.
Dual dq_norm(const DualQuaternion& q);
// Squared norm (Q.Q, 2 Q.Qeps) = Qd dq_conj(Qd) restricted to its scalar parts.
Dual dq_norm_sq(const DualQuaternion& q);

bool dq_is_unit(const DualQuaternion& q, double tol = kUnitTol);

// Real part scaled to unit norm, dual part projected orthogonal to it
// (the dual part is NOT divided by the norm). Idempotent.
DualQuaternion dq_normalize(const DualQuaternion& q);

// Relative transform between unit dual quaternions: dq_conj(p) * q.
// Identity iff p == q.
DualQuaternion dq_error(const DualQuaternion& p, const DualQuaternion& q);

inline Vec8 dq_to_vec8(const DualQuaternion& q) {
  Vec8 v;
  v << q.real.w, q.real.x, q.real.y, q.real.z, q.dual.w, q.dual.x, q.dual.y, q.dual.z;
  return v;
}

inline DualQuaternion dq_from_vec8(const Vec8& v) {
  return {{v(0), v(1), v(2), v(3)}, {v(4), v(5), v(6), v(7)}};
}

// 8x8 matrix forms: dq_mul(p, q) == dq_matrix_left(p) * vec8(q)
//                                == dq_matrix_right(q) * vec8(p).
// The dual 4x4 block sits in the lower-left corner.
Mat8 dq_matrix_left(const DualQuaternion& q);
Mat8 dq_matrix_right(const DualQuaternion& q);
// Matrix forms of dq_conj(q) / dq_dual_conj(q) built from the conjugate
// 4x4 blocks (dual-conj flips the sign of the lower-left block).
Mat8 dq_matrix_left_conj(const DualQuaternion& q);
Mat8 dq_matrix_right_conj(const DualQuaternion& q);
Mat8 dq_matrix_left_dual_conj(const DualQuaternion& q);
Mat8 dq_matrix_right_dual_conj(const DualQuaternion& q);

// exp/log evaluated as quaternion exp/log over dual-number scalars, so the
// dual parts are exact directional derivatives and roundtrip is inherited
// from the quaternion forms. log requires real w > 0 (principal branch).
DualQuaternion dq_exp(const DualQuaternion& q);
DualQuaternion dq_log(const DualQuaternion& q);

// Pose encodings. rot_trans: R + eps/2 T R (rotate about the body frame,
// then translate); trans_rot: R + eps/2 R T.
DualQuaternion dq_from_rot_trans(const Quat& rotation, const Eigen::Vector3d& translation);
DualQuaternion dq_from_trans_rot(const Quat& rotation, const Eigen::Vector3d& translation);

enum class TranslationConvention { kRotTrans, kTransRot };

Eigen::Vector3d dq_extract_translation(const DualQuaternion& q,
                                       TranslationConvention convention);

inline Quat dq_rotation(const DualQuaternion& q) { return q.real; }

// Point p lifted to 1 + eps p, transformed as Qd Pd dq_dual_conj(Qd).
Eigen::Vector3d dq_transform_point(const DualQuaternion& q, const Eigen::Vector3d& p);

}  // namespace dqrb
