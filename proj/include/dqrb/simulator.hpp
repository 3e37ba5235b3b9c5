#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dqrb/kinematics.hpp"
#include "dqrb/util.hpp"

namespace dqrb {

// Wall identity doubles as the collision label of a record: the first wall the
// body touches during the following output interval, or kNone for free flight.
enum class WallLabel : int {
  kNone = 0,
  kPosX = 1,
  kNegX = 2,
  kPosY = 3,
  kNegY = 4,
  kPosZ = 5,
  kNegZ = 6,
};

inline constexpr int kWallCount = 6;
inline constexpr int kLabelCount = 7;

const char* wall_label_name(WallLabel label);               // "none", "+x", ...
WallLabel wall_label_from_name(const std::string& name);    // SchemaError on unknown
Eigen::Vector3d wall_outward_normal(WallLabel label);       // DegenerateInput for kNone
WallLabel wall_from_outward_normal(const Eigen::Vector3d& n);  // snap to dominant axis

struct SimConfig {
  double box_half_extent = 0.2;                       // cubic box [-h, h]^3
  Eigen::Vector3d body_half_dims{0.1, 0.1, 0.1};      // cuboid half extents
  double mass = 1.0;
  double restitution = 1.0;                           // 1 = elastic
  double friction = 0.0;                              // Coulomb coefficient
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  double dt_internal = 1e-5;
  int output_every = 10000;                           // internal steps per record
  int n_records = 20000;
  double speed_scale = 0.5;                           // initial |v| upper bound
  double spin_scale = 3.0;                            // initial |omega| upper bound
};

// Desk-scale preset used for dataset generation: gravity off so free flight is
// a constant twist, elastic and frictionless so energy is conserved.
SimConfig desk_preset();

// Principal moments of a solid cuboid: I_x = (m/3)(h_y^2 + h_z^2), etc.
Eigen::Vector3d cuboid_inertia(double mass, const Eigen::Vector3d& half_dims);

// One dataset row: the body state at t plus the label of the interval ahead.
struct RigidBodyRecord {
  double t = 0.0;
  Quat orientation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_dims = Eigen::Vector3d::Zero();
  double mass = 1.0;
  Eigen::Vector3d angular_momentum = Eigen::Vector3d::Zero();
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  WallLabel collision_label = WallLabel::kNone;
};

// Draws a random non-intersecting initial state and simulates
// n_records * output_every internal steps, emitting one record per
// output_every steps. Deterministic in the seed.
std::vector<RigidBodyRecord> simulate(const SimConfig& config, std::uint64_t seed);

// Same, from explicit initial conditions. DegenerateInput if the body already
// intersects a wall, ConfigError if the body cannot fit in the box at all.
std::vector<RigidBodyRecord> simulate_from(const SimConfig& config,
                                           const Eigen::Vector3d& position,
                                           const Quat& orientation,
                                           const Eigen::Vector3d& velocity,
                                           const Eigen::Vector3d& angular_velocity);

// Applies a pure rotation about the box center to every field of a record.
// Vectors rotate, the attitude is premultiplied, half_dims and mass are body
// properties and stay fixed, and the label follows the rotated wall normal.
RigidBodyRecord rotate_record(const RigidBodyRecord& record, const Quat& rotation);

// The eight symmetry rotations attached to a wall: 90/180/270 degrees about
// the wall axis (in-plane), then one rotation carrying the wall onto each of
// the five other walls (90 degrees about the normalized cross product of the
// outward normals, or 180 degrees about the next cyclic axis for the opposite
// wall). Unlabeled records borrow the +x family so every record grows 9x.
std::array<Quat, 8> augmentation_rotations(WallLabel wall);

// original + 8 rotated copies per record, each record using its own label's
// rotation family. Order: record 0 and its 8 copies, then record 1, ...
std::vector<RigidBodyRecord> augment(const std::vector<RigidBodyRecord>& records);

// Histogram over labels, indexed by static_cast<int>(WallLabel).
std::array<long, kLabelCount> label_counts(const std::vector<RigidBodyRecord>& records);

// Largest wall penetration over the body's corners; <= 0 means fully inside.
double wall_penetration(const RigidBodyRecord& record, double box_half);

}  // namespace dqrb
