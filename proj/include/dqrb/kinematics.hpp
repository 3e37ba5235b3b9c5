#pragma once

#include <Eigen/Dense>

#include "dqrb/dualquat.hpp"

namespace dqrb {

// Rigid body snapshot. momentum and angular_momentum are carried explicitly
// because the prediction pipeline regresses them directly; keep them
// consistent with velocity/angular_velocity via the helpers below.
struct RigidBodyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Quat orientation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_momentum = Eigen::Vector3d::Zero();
  double mass = 1.0;
  Eigen::Vector3d inertia_body = Eigen::Vector3d::Ones();  // principal moments
};

// World twist of a body at p moving with COM velocity v and angular velocity
// omega: (0, omega) + eps (0, v + p x omega). The linear part is the velocity
// of the body point currently at the world origin, so it is invariant along
// the screw generated by the twist.
DualQuaternion twist_world(const Eigen::Vector3d& omega, const Eigen::Vector3d& v,
                           const Eigen::Vector3d& p);

// Body-frame twist: (0, omega) + eps (0, v + omega x p).
DualQuaternion twist_body(const Eigen::Vector3d& omega, const Eigen::Vector3d& v,
                          const Eigen::Vector3d& p);

// q(t+dt) = exp((dt/2) omega) q(t), omega in world coordinates, renormalized.
Quat quat_kinematics_step(const Quat& q, const Eigen::Vector3d& omega_world, double dt);

// Qd(t+dt) = exp((dt/2) twist) Qd(t) for a world twist, with unit guard.
DualQuaternion integrate_pose(const DualQuaternion& pose, const DualQuaternion& twist,
                              double dt);

// World inertia through quaternion column transforms of diag(1, I1, I2, I3):
// (O (O I O*)^T O*)^T, returned as the lower-right 3x3 (equals R I R^T).
Eigen::Matrix3d inertia_world_q(const Quat& orientation, const Eigen::Vector3d& inertia_body);

// Same construction on the 8x8 form diag(1, I1, I2, I3, 1, 1, 1, 1) with an
// orientation dual quaternion (unit, zero dual part).
Mat8 inertia_world_dq(const DualQuaternion& odq, const Eigen::Vector3d& inertia_body);

// omega = I_world(orientation)^-1 L.
Eigen::Vector3d angular_velocity_from_momentum(const Eigen::Vector3d& angular_momentum,
                                               const Quat& orientation,
                                               const Eigen::Vector3d& inertia_body);

// v = impulse / m.
Eigen::Vector3d velocity_from_impulse(const Eigen::Vector3d& impulse, double mass);

inline Eigen::Vector3d momentum_from_velocity(const Eigen::Vector3d& v, double mass) {
  return mass * v;
}

inline Eigen::Vector3d angular_momentum_world(const Quat& orientation,
                                              const Eigen::Vector3d& inertia_body,
                                              const Eigen::Vector3d& omega) {
  return inertia_world_q(orientation, inertia_body) * omega;
}

}  // namespace dqrb
