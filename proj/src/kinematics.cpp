#include "dqrb/kinematics.hpp"

namespace dqrb {

DualQuaternion twist_world(const Eigen::Vector3d& omega, const Eigen::Vector3d& v,
                           const Eigen::Vector3d& p) {
  return {q_pure(omega), q_pure(v + p.cross(omega))};
}

DualQuaternion twist_body(const Eigen::Vector3d& omega, const Eigen::Vector3d& v,
                          const Eigen::Vector3d& p) {
  return {q_pure(omega), q_pure(v + omega.cross(p))};
}

Quat quat_kinematics_step(const Quat& q, const Eigen::Vector3d& omega_world, double dt) {
  if (!(dt > 0.0)) throw DegenerateInput("quat_kinematics_step: dt must be positive");
  if (!q_is_unit(q)) throw DegenerateInput("quat_kinematics_step: q must be unit");
  Quat step = q_exp(q_scale(q_pure(omega_world), 0.5 * dt));
  return q_normalize(q_mul(step, q));
}

DualQuaternion integrate_pose(const DualQuaternion& pose, const DualQuaternion& twist,
                              double dt) {
  if (!(dt > 0.0)) throw DegenerateInput("integrate_pose: dt must be positive");
  if (!dq_is_unit(pose)) throw DegenerateInput("integrate_pose: pose must be unit");
  if (std::abs(twist.real.w) > kUnitTol || std::abs(twist.dual.w) > kUnitTol)
    throw DegenerateInput("integrate_pose: twist must be pure");
  DualQuaternion step = dq_exp(dq_scale(twist, 0.5 * dt));
  return dq_normalize(dq_mul(step, pose));
}

Eigen::Matrix3d inertia_world_q(const Quat& orientation, const Eigen::Vector3d& inertia_body) {
  if (!q_is_unit(orientation))
    throw DegenerateInput("inertia_world_q: orientation must be unit");
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.diagonal() << 1.0, inertia_body.x(), inertia_body.y(), inertia_body.z();

  auto rotate_columns = [&](const Eigen::Matrix4d& a) {
    Eigen::Matrix4d out;
    for (int j = 0; j < 4; ++j) {
      Quat c = q_from_vec4(a.col(j));
      out.col(j) = q_to_vec4(q_mul(q_mul(orientation, c), q_conj(orientation)));
    }
    return out;
  };

  Eigen::Matrix4d world = rotate_columns(rotate_columns(m).transpose()).transpose();
  return world.bottomRightCorner<3, 3>();
}

Mat8 inertia_world_dq(const DualQuaternion& odq, const Eigen::Vector3d& inertia_body) {
  if (!dq_is_unit(odq) || q_norm(odq.dual) > kUnitTol)
    throw DegenerateInput("inertia_world_dq: orientation must be unit with zero dual part");
  Mat8 m = Mat8::Identity();
  m.diagonal().head<4>() << 1.0, inertia_body.x(), inertia_body.y(), inertia_body.z();

  auto rotate_columns = [&](const Mat8& a) {
    Mat8 out;
    for (int j = 0; j < 8; ++j) {
      DualQuaternion c = dq_from_vec8(a.col(j));
      out.col(j) = dq_to_vec8(dq_mul(dq_mul(odq, c), dq_conj(odq)));
    }
    return out;
  };

  return rotate_columns(rotate_columns(m).transpose()).transpose();
}

Eigen::Vector3d angular_velocity_from_momentum(const Eigen::Vector3d& angular_momentum,
                                               const Quat& orientation,
                                               const Eigen::Vector3d& inertia_body) {
  if (!(inertia_body.minCoeff() > 0.0))
    throw DegenerateInput("angular_velocity_from_momentum: inertia must be positive");
  Eigen::Matrix3d iw = inertia_world_q(orientation, inertia_body);
  return iw.ldlt().solve(angular_momentum);
}

Eigen::Vector3d velocity_from_impulse(const Eigen::Vector3d& impulse, double mass) {
  if (!(mass > 0.0)) throw DegenerateInput("velocity_from_impulse: mass must be positive");
  return impulse / mass;
}

}  // namespace dqrb
