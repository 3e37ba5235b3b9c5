#include "dqrb/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "dqrb/errors.hpp"
#include "dqrb/kinematics.hpp"
#include "dqrb/quat.hpp"

namespace dqrb {
namespace {

Quat pure(const Eigen::Vector3d& v) { return {0.0, v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec(const Quat& q) { return {q.x, q.y, q.z}; }

// shared two-hidden-layer trunk: dropout runs before each hidden layer
ad::Tensor trunk(const DQLinearLayer& l1, const DQLinearLayer& l2, const StageHyper& hyper,
                 const ad::Tensor& x, bool train, Rng& rng) {
  ad::Tensor h = ad::dropout(x, hyper.dropout, train, rng);
  h = apply_activation(dq_layer_forward(l1, h), hyper.activation);
  h = ad::dropout(h, hyper.dropout, train, rng);
  return apply_activation(dq_layer_forward(l2, h), hyper.activation);
}

void append_layer_params(std::vector<ad::Tensor>& out, const DQLinearLayer& layer) {
  for (const auto& p : dq_layer_params(layer)) out.push_back(p);
}

}  // namespace

InputSet encode_inputs(const RigidBodyRecord& record, double box_half) {
  if (!q_is_unit(record.orientation))
    throw DegenerateInput("record orientation must be a unit quaternion");
  InputSet in;
  in.mass = record.mass;
  in.inertia_body = cuboid_inertia(record.mass, record.half_dims);
  in.dqs[0] = {Quat{1, 0, 0, 0}, pure(record.position)};   // P: 1 + eps p
  in.dqs[1] = {record.orientation, Quat{0, 0, 0, 0}};      // O: zero dual part
  in.dqs[2] = {Quat{0, 0, 0, 0}, pure(record.velocity)};   // V: pure dual
  in.dqs[3] = {pure(record.angular_velocity), Quat{0, 0, 0, 0}};  // W: pure real
  in.dqs[4] = {pure(record.half_dims), Quat{0, 0, 0, 0}};  // G: pure real
  in.dqs[5] = {Quat{0, 0, 0, 0}, pure(record.momentum)};   // I: pure dual
  in.dqs[6] = {pure(record.angular_momentum), Quat{0, 0, 0, 0}};  // L: pure real
  for (int w = 1; w <= kWallCount; ++w) {
    // plane n + eps(z.n) with z on the wall: z.n = box_half for every wall
    Eigen::Vector3d n = wall_outward_normal(static_cast<WallLabel>(w));
    in.dqs[6 + w] = {pure(n), Quat{box_half, 0, 0, 0}};
  }
  return in;
}

Eigen::VectorXd input_column(const InputSet& in) {
  Eigen::VectorXd col(8 * kInputCount);
  for (int i = 0; i < kInputCount; ++i) col.segment<8>(8 * i) = dq_to_vec8(in.dqs[i]);
  return col;
}

Eigen::VectorXd reduced_column(const InputSet& in, WallLabel wall) {
  if (wall == WallLabel::kNone)
    throw DegenerateInput("reduced input needs a wall, not none");
  Eigen::VectorXd col(8 * kReducedCount);
  for (int i = 0; i < kReducedCount - 1; ++i) col.segment<8>(8 * i) = dq_to_vec8(in.dqs[i]);
  col.segment<8>(8 * (kReducedCount - 1)) =
      dq_to_vec8(in.dqs[6 + static_cast<int>(wall)]);
  return col;
}

int label_to_class(WallLabel label) {
  return label == WallLabel::kNone ? kNoneClass : static_cast<int>(label) - 1;
}

WallLabel class_to_label(int cls) {
  if (cls < 0 || cls >= kClassCount) throw DegenerateInput("class index out of range");
  return cls == kNoneClass ? WallLabel::kNone : static_cast<WallLabel>(cls + 1);
}

// ---- attention stage ----

AttentionClassifier make_attention(AttentionKind kind, const StageHyper& hyper, Rng& rng) {
  AttentionClassifier m;
  m.kind = kind;
  m.hyper = hyper;
  const std::string prefix = kind == AttentionKind::kMulti ? "multi" : "binary";
  int in = kind == AttentionKind::kMulti ? kInputCount : kReducedCount;
  int out = kind == AttentionKind::kMulti ? kClassCount : 1;
  m.l1 = dq_linear_layer(in, hyper.hidden1, rng, prefix + ".l1");
  m.l2 = dq_linear_layer(hyper.hidden1, hyper.hidden2, rng, prefix + ".l2");
  m.out = dq_linear_layer(hyper.hidden2, out, rng, prefix + ".out");
  return m;
}

ad::Tensor dq_error_scores(const ad::Tensor& out, int classes) {
  if (out.rows() != 8 * classes) throw ShapeError("expected 8 rows per class");
  std::vector<ad::Tensor> scores;
  scores.reserve(classes);
  for (int i = 0; i < classes; ++i) {
    ad::Tensor real = ad::slice_rows(out, 8 * i, 4);
    ad::Tensor dual = ad::slice_rows(out, 8 * i + 4, 4);
    ad::Tensor nr = ad::sqrt_eltwise(ad::colsum(ad::hadamard(real, real)), kNormEps);
    ad::Tensor rn = ad::div_colbcast(real, nr);
    ad::Tensor dn = ad::div_colbcast(dual, nr);
    // translation of the normalized DQ; the part parallel to the rotation
    // drops out of the vector component, so no orthogonal projection needed
    ad::Tensor trans = ad::scale(ad::quatmul(dn, ad::quatconj(rn)), 2.0);
    ad::Tensor tv = ad::slice_rows(trans, 1, 3);
    ad::Tensor tn = ad::sqrt_eltwise(ad::colsum(ad::hadamard(tv, tv)), kNormEps);
    scores.push_back(ad::sub(ad::scale(ad::slice_rows(rn, 0, 1), kScoreAlpha), tn));
  }
  return ad::concat_rows(scores);
}

ad::Tensor attention_logits(const AttentionClassifier& model, const ad::Tensor& x,
                            bool train, Rng& rng) {
  ad::Tensor h = trunk(model.l1, model.l2, model.hyper, x, train, rng);
  ad::Tensor out = dq_layer_forward(model.out, h);
  return dq_error_scores(out, model.kind == AttentionKind::kMulti ? kClassCount : 1);
}

std::vector<double> attention_multi_probs(const AttentionClassifier& model,
                                          const InputSet& in) {
  if (model.kind != AttentionKind::kMulti)
    throw ConfigError("multi probabilities need a multi classifier");
  Rng scratch(0);
  ad::Tensor x = ad::constant(input_column(in));
  ad::Tensor p = ad::softmax(attention_logits(model, x, false, scratch));
  std::vector<double> probs(kClassCount);
  for (int i = 0; i < kClassCount; ++i) probs[i] = p.value()(i, 0);
  return probs;
}

std::vector<double> attention_binary_probs(const AttentionClassifier& model,
                                           const InputSet& in) {
  if (model.kind != AttentionKind::kBinary)
    throw ConfigError("binary probabilities need a binary classifier");
  Rng scratch(0);
  ad::Mat x(8 * kReducedCount, kWallCount);
  for (int w = 1; w <= kWallCount; ++w)
    x.col(w - 1) = reduced_column(in, static_cast<WallLabel>(w));
  ad::Tensor p = ad::sigmoid(attention_logits(model, ad::constant(x), false, scratch));
  std::vector<double> probs(kWallCount);
  for (int w = 0; w < kWallCount; ++w) probs[w] = p.value()(0, w);
  return probs;
}

WallLabel interface_select(const std::vector<double>& scores, AttentionKind kind) {
  size_t expect = kind == AttentionKind::kMulti ? kClassCount : kWallCount;
  if (scores.size() != expect) throw ShapeError("unexpected score count");
  bool all_zero = true;
  for (double s : scores) all_zero = all_zero && s == 0.0;
  if (all_zero) return WallLabel::kNone;
  int best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  if (kind == AttentionKind::kMulti) return class_to_label(best);
  if (scores[best] < kBinaryThreshold) return WallLabel::kNone;
  return static_cast<WallLabel>(best + 1);
}

std::vector<ad::Tensor> attention_params(const AttentionClassifier& model) {
  std::vector<ad::Tensor> params;
  append_layer_params(params, model.l1);
  append_layer_params(params, model.l2);
  append_layer_params(params, model.out);
  return params;
}

// ---- collision stage ----

CollisionNet make_collision_net(const StageHyper& hyper, Rng& rng, const std::string& name) {
  CollisionNet net;
  net.hyper = hyper;
  net.l1 = dq_linear_layer(kReducedCount, hyper.hidden1, rng, name + ".l1");
  net.l2 = dq_linear_layer(hyper.hidden1, hyper.hidden2, rng, name + ".l2");
  net.out = dq_linear_layer(hyper.hidden2, 1, rng, name + ".out");
  return net;
}

ad::Tensor collision_forward(const CollisionNet& net, const ad::Tensor& x, bool train,
                             Rng& rng) {
  return dq_layer_forward(net.out, trunk(net.l1, net.l2, net.hyper, x, train, rng));
}

std::vector<ad::Tensor> collision_params(const CollisionStage& stage) {
  std::vector<ad::Tensor> params;
  for (const CollisionNet* net : {&stage.twist, &stage.impulse, &stage.angmom}) {
    append_layer_params(params, net->l1);
    append_layer_params(params, net->l2);
    append_layer_params(params, net->out);
  }
  return params;
}

CollisionTargets collision_targets(const RigidBodyRecord& cur, const RigidBodyRecord& next,
                                   double dt) {
  DualQuaternion p0 = dq_from_rot_trans(cur.orientation, cur.position);
  DualQuaternion p1 = dq_from_rot_trans(next.orientation, next.position);
  CollisionTargets t;
  t.twist = dq_scale(dq_log(dq_mul(p1, dq_conj(p0))), 2.0 / dt);
  t.impulse = {Quat{0, 0, 0, 0}, pure(next.momentum)};
  t.angmom = {pure(next.angular_momentum), Quat{0, 0, 0, 0}};
  return t;
}

CollisionTargets collision_predict(const CollisionStage& stage,
                                   const Eigen::VectorXd& reduced) {
  Rng scratch(0);
  ad::Tensor x = ad::constant(reduced);
  CollisionTargets t;
  t.twist = dq_from_vec8(collision_forward(stage.twist, x, false, scratch).value().col(0));
  // a twist lives in the pure subspace; the net's scalar slots are regression
  // residue and would trip the purity guard in integrate_pose
  t.twist.real.w = 0.0;
  t.twist.dual.w = 0.0;
  t.impulse =
      dq_from_vec8(collision_forward(stage.impulse, x, false, scratch).value().col(0));
  t.angmom =
      dq_from_vec8(collision_forward(stage.angmom, x, false, scratch).value().col(0));
  return t;
}

RigidBodyRecord output_layer(const RigidBodyRecord& cur, const CollisionTargets& targets,
                             double dt) {
  RigidBodyRecord next = cur;
  next.t = cur.t + dt;
  DualQuaternion pose = dq_from_rot_trans(cur.orientation, cur.position);
  pose = integrate_pose(pose, targets.twist, dt);
  next.orientation = dq_rotation(pose);
  next.position = dq_extract_translation(pose, TranslationConvention::kRotTrans);
  next.momentum = vec(targets.impulse.dual);
  next.velocity = velocity_from_impulse(next.momentum, cur.mass);
  next.angular_momentum = vec(targets.angmom.real);
  next.angular_velocity = angular_velocity_from_momentum(
      next.angular_momentum, next.orientation, cuboid_inertia(cur.mass, cur.half_dims));
  next.collision_label = WallLabel::kNone;
  return next;
}

RigidBodyRecord hard_path_step(const RigidBodyRecord& cur, double dt) {
  RigidBodyRecord next = cur;
  next.t = cur.t + dt;
  DualQuaternion pose = dq_from_rot_trans(cur.orientation, cur.position);
  DualQuaternion twist = twist_world(cur.angular_velocity, cur.velocity, cur.position);
  Eigen::Vector3d vs = cur.velocity + cur.position.cross(cur.angular_velocity);
  pose = integrate_pose(pose, twist, dt);
  next.orientation = dq_rotation(pose);
  next.position = dq_extract_translation(pose, TranslationConvention::kRotTrans);
  next.velocity = vs + cur.angular_velocity.cross(next.position);
  next.momentum = momentum_from_velocity(next.velocity, cur.mass);
  next.angular_momentum = angular_momentum_world(
      next.orientation, cuboid_inertia(cur.mass, cur.half_dims), cur.angular_velocity);
  next.collision_label = WallLabel::kNone;
  return next;
}

// ---- training datasets ----

AttentionData attention_dataset(const std::vector<RigidBodyRecord>& records,
                                double box_half, bool augment_collisions) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<int> cls;
  for (const auto& rec : records) {
    cols.push_back(input_column(encode_inputs(rec, box_half)));
    cls.push_back(label_to_class(rec.collision_label));
    if (augment_collisions && rec.collision_label != WallLabel::kNone) {
      for (const Quat& rot : augmentation_rotations(rec.collision_label)) {
        RigidBodyRecord copy = rotate_record(rec, rot);
        cols.push_back(input_column(encode_inputs(copy, box_half)));
        cls.push_back(label_to_class(copy.collision_label));
      }
    }
  }
  AttentionData data;
  data.x.resize(8 * kInputCount, cols.size());
  for (size_t i = 0; i < cols.size(); ++i) data.x.col(i) = cols[i];
  data.cls = std::move(cls);
  return data;
}

BinaryData binary_dataset(const std::vector<RigidBodyRecord>& records, double box_half,
                          bool augment_collisions) {
  std::vector<RigidBodyRecord> expanded;
  for (const auto& rec : records) {
    expanded.push_back(rec);
    if (augment_collisions && rec.collision_label != WallLabel::kNone)
      for (const Quat& rot : augmentation_rotations(rec.collision_label))
        expanded.push_back(rotate_record(rec, rot));
  }
  BinaryData data;
  data.x.resize(8 * kReducedCount, expanded.size() * kWallCount);
  data.y.reserve(expanded.size() * kWallCount);
  long col = 0;
  for (const auto& rec : expanded) {
    InputSet in = encode_inputs(rec, box_half);
    for (int w = 1; w <= kWallCount; ++w, ++col) {
      WallLabel wall = static_cast<WallLabel>(w);
      data.x.col(col) = reduced_column(in, wall);
      data.y.push_back(rec.collision_label == wall ? 1.0 : 0.0);
    }
  }
  return data;
}

CollisionData collision_dataset(const std::vector<RigidBodyRecord>& records, double dt,
                                double box_half, bool augment) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<CollisionTargets> targets;
  auto add = [&](const RigidBodyRecord& cur, const RigidBodyRecord& next) {
    cols.push_back(reduced_column(encode_inputs(cur, box_half), cur.collision_label));
    targets.push_back(collision_targets(cur, next, dt));
  };
  for (size_t k = 0; k + 1 < records.size(); ++k) {
    if (records[k].collision_label == WallLabel::kNone) continue;
    add(records[k], records[k + 1]);
    if (!augment) continue;
    for (const Quat& rot : augmentation_rotations(records[k].collision_label))
      add(rotate_record(records[k], rot), rotate_record(records[k + 1], rot));
  }
  if (cols.empty()) throw DegenerateInput("no wall-labeled record pairs to train on");
  CollisionData data;
  data.x.resize(8 * kReducedCount, cols.size());
  data.twist.resize(8, cols.size());
  data.impulse.resize(8, cols.size());
  data.angmom.resize(8, cols.size());
  for (size_t i = 0; i < cols.size(); ++i) {
    data.x.col(i) = cols[i];
    data.twist.col(i) = dq_to_vec8(targets[i].twist);
    data.impulse.col(i) = dq_to_vec8(targets[i].impulse);
    data.angmom.col(i) = dq_to_vec8(targets[i].angmom);
  }
  return data;
}

// ---- sequence prediction ----

std::vector<TraceStep> predict_sequence(const AttentionClassifier& attention,
                                        const CollisionStage& collision,
                                        RigidBodyRecord state, int n_steps, double dt,
                                        double box_half) {
  std::vector<TraceStep> trace;
  trace.reserve(n_steps);
  for (int s = 0; s < n_steps; ++s) {
    InputSet in = encode_inputs(state, box_half);
    WallLabel pick =
        attention.kind == AttentionKind::kMulti
            ? interface_select(attention_multi_probs(attention, in), AttentionKind::kMulti)
            : interface_select(attention_binary_probs(attention, in),
                               AttentionKind::kBinary);
    TraceStep step;
    step.attention_decision = pick;
    if (pick == WallLabel::kNone) {
      state = hard_path_step(state, dt);
    } else {
      step.used_collision_net = true;
      state = output_layer(state, collision_predict(collision, reduced_column(in, pick)), dt);
    }
    step.state = state;
    step.out_of_domain = wall_penetration(state, box_half) > 1e-9;
    trace.push_back(step);
  }
  return trace;
}

std::vector<RigidBodyRecord> oracle_sequence(const std::vector<RigidBodyRecord>& records,
                                             double dt) {
  if (records.empty()) throw DegenerateInput("oracle sequence needs at least one record");
  std::vector<RigidBodyRecord> out;
  out.reserve(records.size());
  RigidBodyRecord state = records[0];
  out.push_back(state);
  for (size_t k = 0; k + 1 < records.size(); ++k) {
    if (records[k].collision_label == WallLabel::kNone)
      state = hard_path_step(state, dt);
    else
      state = output_layer(state, collision_targets(records[k], records[k + 1], dt), dt);
    out.push_back(state);
  }
  return out;
}

}  // namespace dqrb
