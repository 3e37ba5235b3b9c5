#include "dqrb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dqrb/errors.hpp"
#include "dqrb/quat.hpp"

namespace dqrb {
namespace {

constexpr double kTieTol = 1e-12;     // corners this close to the deepest share the impulse
constexpr double kChunkSafety = 0.9;  // fraction of a wall gap a free-flight chunk may cover

const char* const kLabelNames[kLabelCount] = {"none", "+x", "-x", "+y", "-y", "+z", "-z"};

int wall_axis(WallLabel label) { return (static_cast<int>(label) - 1) / 2; }

double wall_sign(WallLabel label) { return (static_cast<int>(label) % 2 == 1) ? 1.0 : -1.0; }

struct Body {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Quat q{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
};

Eigen::Matrix3d rot_matrix(const Quat& q) {
  Eigen::Matrix3d m;
  m.col(0) = q_rotate_vec(q, Eigen::Vector3d::UnitX());
  m.col(1) = q_rotate_vec(q, Eigen::Vector3d::UnitY());
  m.col(2) = q_rotate_vec(q, Eigen::Vector3d::UnitZ());
  return m;
}

std::array<Eigen::Vector3d, 8> body_corners(const Body& b, const Eigen::Vector3d& h) {
  Eigen::Matrix3d rot = rot_matrix(b.q);
  std::array<Eigen::Vector3d, 8> out;
  for (int i = 0; i < 8; ++i) {
    Eigen::Vector3d c((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                      (i & 4) ? h.z() : -h.z());
    out[i] = b.p + rot * c;
  }
  return out;
}

struct Contact {
  double depth = 0.0;  // > 0 only when penetrating
  WallLabel wall = WallLabel::kNone;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

// Deepest wall penetration. The contact point averages all corners within
// kTieTol of the deepest one so a flat face hit carries no spurious torque.
Contact deepest_contact(const std::array<Eigen::Vector3d, 8>& corners, double half) {
  Contact best;
  for (int wl = 1; wl <= kWallCount; ++wl) {
    WallLabel label = static_cast<WallLabel>(wl);
    int ax = wall_axis(label);
    double sg = wall_sign(label);
    double deepest = -std::numeric_limits<double>::infinity();
    for (const auto& c : corners) deepest = std::max(deepest, sg * c[ax] - half);
    if (deepest <= best.depth) continue;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    int ties = 0;
    for (const auto& c : corners) {
      if (sg * c[ax] - half >= deepest - kTieTol) {
        point += c;
        ++ties;
      }
    }
    best.depth = deepest;
    best.wall = label;
    best.point = point / ties;
  }
  return best;
}

// Number of dt steps guaranteed contact free under the current twist. Corner
// approach toward a wall is bounded by the component of the COM velocity plus
// |w| |h| for rotation about the COM; the COM component itself rotates along
// the screw at rate at most |w| |v|. Solving
//   a t + 0.5 b t^2 = kChunkSafety * gap
// per wall gives a horizon no corner can cross.
long safe_steps(const Body& b, const std::array<Eigen::Vector3d, 8>& corners,
                const SimConfig& cfg, long steps_left) {
  double vnorm = b.v.norm();
  double slop = b.w.norm() * cfg.body_half_dims.norm();
  double curve = b.w.norm() * vnorm;
  double tmin = std::numeric_limits<double>::infinity();
  for (int wl = 1; wl <= kWallCount; ++wl) {
    WallLabel label = static_cast<WallLabel>(wl);
    int ax = wall_axis(label);
    double sg = wall_sign(label);
    double reach = -std::numeric_limits<double>::infinity();
    for (const auto& c : corners) reach = std::max(reach, sg * c[ax]);
    double gap = std::max(cfg.box_half_extent - reach, 0.0) * kChunkSafety;
    double a = std::max(sg * b.v[ax], 0.0) + slop;
    double t;
    if (curve > 0.0) {
      t = (std::sqrt(a * a + 2.0 * curve * gap) - a) / curve;
    } else if (a > 0.0) {
      t = gap / a;
    } else {
      continue;  // nothing moves toward this wall
    }
    tmin = std::min(tmin, t);
  }
  double steps = std::floor(std::min(tmin / cfg.dt_internal, double(steps_left)));
  return std::clamp(long(steps), 1L, steps_left);
}

// Advances the pose along the current twist and rotates the COM velocity with
// it: the dual part v + p x w is invariant along the screw, so the velocity at
// the new position is that invariant minus p' x w.
void screw_advance(Body& b, double dt) {
  DualQuaternion pose = dq_from_rot_trans(b.q, b.p);
  DualQuaternion twist = twist_world(b.w, b.v, b.p);
  Eigen::Vector3d vs = b.v + b.p.cross(b.w);
  pose = integrate_pose(pose, twist, dt);
  b.q = dq_rotation(pose);
  b.p = dq_extract_translation(pose, TranslationConvention::kRotTrans);
  b.v = vs + b.w.cross(b.p);
}

// Impulse response at the deepest contact followed by positional projection
// out of the wall. Loops because the projection can leave another corner
// penetrating a different wall. Separating contacts are only projected.
void resolve_contacts(const SimConfig& cfg, const Eigen::Vector3d& inertia_body, Body& body,
                      WallLabel* first_label) {
  Eigen::Matrix3d iw = inertia_world_q(body.q, inertia_body);
  auto inv = iw.ldlt();
  for (int pass = 0; pass < 16; ++pass) {
    Contact c = deepest_contact(body_corners(body, cfg.body_half_dims), cfg.box_half_extent);
    if (c.wall == WallLabel::kNone) break;
    if (*first_label == WallLabel::kNone) *first_label = c.wall;
    Eigen::Vector3d n = -wall_outward_normal(c.wall);
    Eigen::Vector3d r = c.point - body.p;
    double un = (body.v + body.w.cross(r)).dot(n);
    if (un < 0.0) {
      double k = 1.0 / cfg.mass + n.dot(inv.solve(r.cross(n)).cross(r));
      double j = -(1.0 + cfg.restitution) * un / k;
      body.v += (j / cfg.mass) * n;
      body.w += inv.solve(r.cross(j * n));
      if (cfg.friction > 0.0) {
        Eigen::Vector3d u = body.v + body.w.cross(r);
        Eigen::Vector3d ut = u - u.dot(n) * n;
        double tn = ut.norm();
        if (tn > 1e-12) {
          Eigen::Vector3d t = ut / tn;
          double kt = 1.0 / cfg.mass + t.dot(inv.solve(r.cross(t)).cross(r));
          double jt = std::min(cfg.friction * j, tn / kt);
          body.v -= (jt / cfg.mass) * t;
          body.w -= inv.solve(r.cross(jt * t));
        }
      }
    }
    body.p += c.depth * n;
  }
}

void validate(const SimConfig& cfg) {
  if (cfg.box_half_extent <= 0.0) throw ConfigError("box_half_extent must be positive");
  if ((cfg.body_half_dims.array() <= 0.0).any())
    throw ConfigError("body_half_dims must be positive");
  if (cfg.mass <= 0.0) throw ConfigError("mass must be positive");
  if (cfg.restitution < 0.0 || cfg.restitution > 1.0)
    throw ConfigError("restitution must lie in [0, 1]");
  if (cfg.friction < 0.0) throw ConfigError("friction must be non-negative");
  if (cfg.dt_internal <= 0.0) throw ConfigError("dt_internal must be positive");
  if (cfg.output_every <= 0) throw ConfigError("output_every must be positive");
  if (cfg.n_records <= 0) throw ConfigError("n_records must be positive");
  if (cfg.speed_scale < 0.0 || cfg.spin_scale < 0.0)
    throw ConfigError("speed_scale and spin_scale must be non-negative");
  // The body tumbles freely, so it must fit at every orientation: the
  // circumscribed sphere has to stay inside the box.
  if (cfg.body_half_dims.norm() >= cfg.box_half_extent)
    throw ConfigError("body cannot fit in the box at every orientation");
}

std::vector<RigidBodyRecord> run(const SimConfig& cfg, Body body) {
  if (deepest_contact(body_corners(body, cfg.body_half_dims), cfg.box_half_extent).wall !=
      WallLabel::kNone)
    throw DegenerateInput("body starts intersecting a wall");
  const double dt = cfg.dt_internal;
  const Eigen::Vector3d inertia = cuboid_inertia(cfg.mass, cfg.body_half_dims);
  const bool zero_g = cfg.gravity.isZero(0.0);
  std::vector<RigidBodyRecord> records;
  records.reserve(cfg.n_records);
  for (int k = 0; k < cfg.n_records; ++k) {
    RigidBodyRecord rec;
    rec.t = k * (cfg.output_every * dt);
    rec.orientation = body.q;
    rec.position = body.p;
    rec.velocity = body.v;
    rec.angular_velocity = body.w;
    rec.half_dims = cfg.body_half_dims;
    rec.mass = cfg.mass;
    rec.momentum = momentum_from_velocity(body.v, cfg.mass);
    rec.angular_momentum = angular_momentum_world(body.q, inertia, body.w);
    records.push_back(rec);

    WallLabel label = WallLabel::kNone;
    long steps_left = cfg.output_every;
    while (steps_left > 0) {
      long chunk = 1;
      if (zero_g) {
        chunk = safe_steps(body, body_corners(body, cfg.body_half_dims), cfg, steps_left);
      } else {
        body.v += cfg.gravity * dt;
      }
      screw_advance(body, chunk * dt);
      steps_left -= chunk;
      resolve_contacts(cfg, inertia, body, &label);
    }
    records[k].collision_label = label;
  }
  return records;
}

Body draw_initial(const SimConfig& cfg, Rng& rng) {
  Body b;
  b.q = q_normalize(Quat{rng.normal(), rng.normal(), rng.normal(), rng.normal()});
  Eigen::Matrix3d rot = rot_matrix(b.q);
  for (int ax = 0; ax < 3; ++ax) {
    double extent = rot.row(ax).cwiseAbs().dot(cfg.body_half_dims);
    double margin = cfg.box_half_extent - extent;
    if (margin <= 0.0) throw ConfigError("body cannot fit in the box at this orientation");
    b.p[ax] = rng.uniform(-0.95 * margin, 0.95 * margin);
  }
  do {
    b.v = rng.vec3(-cfg.speed_scale, cfg.speed_scale);
  } while (b.v.norm() > cfg.speed_scale);
  do {
    b.w = rng.vec3(-cfg.spin_scale, cfg.spin_scale);
  } while (b.w.norm() > cfg.spin_scale);
  return b;
}

}  // namespace

const char* wall_label_name(WallLabel label) { return kLabelNames[static_cast<int>(label)]; }

WallLabel wall_label_from_name(const std::string& name) {
  for (int i = 0; i < kLabelCount; ++i)
    if (name == kLabelNames[i]) return static_cast<WallLabel>(i);
  throw SchemaError("unknown collision label: " + name);
}

Eigen::Vector3d wall_outward_normal(WallLabel label) {
  if (label == WallLabel::kNone) throw DegenerateInput("label none has no wall normal");
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[wall_axis(label)] = wall_sign(label);
  return n;
}

WallLabel wall_from_outward_normal(const Eigen::Vector3d& n) {
  int ax = 0;
  double m = n.cwiseAbs().maxCoeff(&ax);
  if (m < 1e-12) throw DegenerateInput("cannot snap a zero normal to a wall");
  return static_cast<WallLabel>(1 + 2 * ax + (n[ax] > 0.0 ? 0 : 1));
}

SimConfig desk_preset() {
  SimConfig cfg;
  cfg.gravity = Eigen::Vector3d::Zero();
  cfg.restitution = 1.0;
  cfg.friction = 0.0;
  return cfg;
}

Eigen::Vector3d cuboid_inertia(double mass, const Eigen::Vector3d& h) {
  double c = mass / 3.0;
  return {c * (h.y() * h.y() + h.z() * h.z()), c * (h.x() * h.x() + h.z() * h.z()),
          c * (h.x() * h.x() + h.y() * h.y())};
}

std::vector<RigidBodyRecord> simulate(const SimConfig& config, std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  return run(config, draw_initial(config, rng));
}

std::vector<RigidBodyRecord> simulate_from(const SimConfig& config,
                                           const Eigen::Vector3d& position,
                                           const Quat& orientation,
                                           const Eigen::Vector3d& velocity,
                                           const Eigen::Vector3d& angular_velocity) {
  validate(config);
  Body b;
  b.p = position;
  b.q = q_normalize(orientation);
  b.v = velocity;
  b.w = angular_velocity;
  return run(config, b);
}

RigidBodyRecord rotate_record(const RigidBodyRecord& record, const Quat& rotation) {
  RigidBodyRecord out = record;
  out.position = q_rotate_vec(rotation, record.position);
  out.velocity = q_rotate_vec(rotation, record.velocity);
  out.angular_velocity = q_rotate_vec(rotation, record.angular_velocity);
  out.momentum = q_rotate_vec(rotation, record.momentum);
  out.angular_momentum = q_rotate_vec(rotation, record.angular_momentum);
  out.orientation = q_mul(rotation, record.orientation);
  if (record.collision_label != WallLabel::kNone) {
    out.collision_label = wall_from_outward_normal(
        q_rotate_vec(rotation, wall_outward_normal(record.collision_label)));
  }
  return out;
}

std::array<Quat, 8> augmentation_rotations(WallLabel wall) {
  if (wall == WallLabel::kNone) wall = WallLabel::kPosX;
  Eigen::Vector3d a = wall_outward_normal(wall);
  std::array<Quat, 8> out;
  int n = 0;
  for (int k = 1; k <= 3; ++k) out[n++] = q_from_axis_angle(a, k * M_PI / 2.0);
  for (int wl = 1; wl <= kWallCount; ++wl) {
    WallLabel other = static_cast<WallLabel>(wl);
    if (other == wall) continue;
    Eigen::Vector3d b = wall_outward_normal(other);
    Eigen::Vector3d axis = a.cross(b);
    if (axis.norm() < 0.5) {
      // opposite wall: half turn about the next cyclic axis
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[(wall_axis(wall) + 1) % 3] = 1.0;
      out[n++] = q_from_axis_angle(e, M_PI);
    } else {
      out[n++] = q_from_axis_angle(axis.normalized(), M_PI / 2.0);
    }
  }
  return out;
}

std::vector<RigidBodyRecord> augment(const std::vector<RigidBodyRecord>& records) {
  std::vector<RigidBodyRecord> out;
  out.reserve(records.size() * 9);
  for (const auto& rec : records) {
    out.push_back(rec);
    for (const Quat& rot : augmentation_rotations(rec.collision_label))
      out.push_back(rotate_record(rec, rot));
  }
  return out;
}

std::array<long, kLabelCount> label_counts(const std::vector<RigidBodyRecord>& records) {
  std::array<long, kLabelCount> counts{};
  for (const auto& rec : records) counts[static_cast<int>(rec.collision_label)]++;
  return counts;
}

double wall_penetration(const RigidBodyRecord& record, double box_half) {
  Body b;
  b.p = record.position;
  b.q = record.orientation;
  double deepest = -std::numeric_limits<double>::infinity();
  for (const auto& corner : body_corners(b, record.half_dims))
    for (int ax = 0; ax < 3; ++ax)
      deepest = std::max(deepest, std::abs(corner[ax]) - box_half);
  return deepest;
}

}  // namespace dqrb
