#pragma once

#include <array>
#include <string>
#include <vector>

#include "dqrb/autodiff.hpp"
#include "dqrb/dataset.hpp"
#include "dqrb/dqnn.hpp"
#include "dqrb/simulator.hpp"

// Two-stage sequence predictor: an attention classifier decides which wall, if
// any, the body will touch during the next interval; on a wall decision a
// collision network predicts twist, impulse and angular momentum and an
// analytic output layer turns them into the next state, otherwise the next
// state is the exact free-flight step.
namespace dqrb {

// Input set: P (position), O (orientation), V (velocity), W (angular
// velocity), G (half dims), I (impulse), L (angular momentum), then the six
// walls. Mass and body inertia ride along as side-channel constants, they are
// not part of the 104 input rows.
inline constexpr int kInputCount = 13;
inline constexpr int kReducedCount = 8;  // walls dropped, one wall appended
inline constexpr int kClassCount = 7;    // six walls then none
inline constexpr int kNoneClass = 6;
inline constexpr double kScoreAlpha = 100.0;   // error-DQ score weight
inline constexpr double kBinaryThreshold = 0.4;
inline constexpr double kNormEps = 1e-12;      // guards graph-side norms

struct InputSet {
  std::array<DualQuaternion, kInputCount> dqs;
  double mass = 1.0;
  Eigen::Vector3d inertia_body = Eigen::Vector3d::Ones();
};

InputSet encode_inputs(const RigidBodyRecord& record, double box_half);
Eigen::VectorXd input_column(const InputSet& in);                    // 104 rows
Eigen::VectorXd reduced_column(const InputSet& in, WallLabel wall);  // 64 rows

// classes: wall order +x,-x,+y,-y,+z,-z as 0..5, none as 6
int label_to_class(WallLabel label);
WallLabel class_to_label(int cls);

// ---- attention stage ----

enum class AttentionKind { kMulti, kBinary };

struct StageHyper {
  int hidden1 = 32;
  int hidden2 = 32;
  Activation activation = Activation::kTanh;
  double dropout = 0.2;
};

struct AttentionClassifier {
  AttentionKind kind = AttentionKind::kMulti;
  StageHyper hyper;
  DQLinearLayer l1, l2, out;  // out: 7 DQs (multi) or 1 DQ (binary)
};

AttentionClassifier make_attention(AttentionKind kind, const StageHyper& hyper, Rng& rng);

// Per-class logit: normalize each output DQ, then the error-DQ similarity to
// the identity, alpha * real_w - |translation|. Softmax (multi) or the
// sigmoid inside the BCE loss (binary) turns logits into probabilities.
ad::Tensor dq_error_scores(const ad::Tensor& out, int classes);

// x: 104xB (multi) or 64xB (binary). Dropout runs before each hidden layer
// in training mode.
ad::Tensor attention_logits(const AttentionClassifier& model, const ad::Tensor& x,
                            bool train, Rng& rng);

std::vector<double> attention_multi_probs(const AttentionClassifier& model, const InputSet& in);
std::vector<double> attention_binary_probs(const AttentionClassifier& model, const InputSet& in);

// multi: argmax over 7 probabilities; binary: argmax over the six wall
// probabilities that reach the 0.4 threshold, none when all stay below. Ties
// pick the lowest index; an all-zero score vector yields none.
WallLabel interface_select(const std::vector<double>& scores, AttentionKind kind);

std::vector<ad::Tensor> attention_params(const AttentionClassifier& model);

// ---- collision stage ----

struct CollisionNet {
  StageHyper hyper;
  DQLinearLayer l1, l2, out;  // out: one dual quaternion
};

// three separate nets sharing only the input encoding and the output layer
struct CollisionStage {
  CollisionNet twist, impulse, angmom;
};

CollisionNet make_collision_net(const StageHyper& hyper, Rng& rng, const std::string& name);
ad::Tensor collision_forward(const CollisionNet& net, const ad::Tensor& x, bool train,
                             Rng& rng);
std::vector<ad::Tensor> collision_params(const CollisionStage& stage);

struct CollisionTargets {
  DualQuaternion twist;    // world twist reproducing the pose change
  DualQuaternion impulse;  // pure dual: next momentum
  DualQuaternion angmom;   // pure real: next angular momentum
};

// Ground truth from a consecutive record pair: the twist is
// (2/dt) log(P(t+dt) P(t)*) so integrate_pose reproduces the recorded pose.
CollisionTargets collision_targets(const RigidBodyRecord& cur, const RigidBodyRecord& next,
                                   double dt);

CollisionTargets collision_predict(const CollisionStage& stage, const Eigen::VectorXd& reduced);

// Analytic, parameter-free: integrate the predicted twist, v = impulse/m,
// omega from the world inertia at the new attitude and the predicted angular
// momentum.
RigidBodyRecord output_layer(const RigidBodyRecord& cur, const CollisionTargets& targets,
                             double dt);

// Exact free flight: one screw step of the twist built from the current
// state; the COM velocity rotates with the screw so that chaining steps
// follows the same flow the simulator integrates.
RigidBodyRecord hard_path_step(const RigidBodyRecord& cur, double dt);

// ---- training datasets ----

struct AttentionData {
  ad::Mat x;              // 104 x N
  std::vector<int> cls;   // class index per column
};
// augment_collisions: wall-labeled records gain their 8 rotated copies,
// unlabeled records stay single.
AttentionData attention_dataset(const std::vector<RigidBodyRecord>& records, double box_half,
                                bool augment_collisions);

struct BinaryData {
  ad::Mat x;               // 64 x 6N: one column per (record, wall) pair
  std::vector<double> y;   // 1 when the record's label is that wall
};
BinaryData binary_dataset(const std::vector<RigidBodyRecord>& records, double box_half,
                          bool augment_collisions);

struct CollisionData {
  ad::Mat x;  // 64 x M reduced inputs at the labeled record
  ad::Mat twist, impulse, angmom;  // 8 x M targets from the following record
};
// Keeps exactly the consecutive pairs whose first record has a wall label,
// optionally with 8 jointly rotated copies per pair. DegenerateInput when
// nothing remains.
CollisionData collision_dataset(const std::vector<RigidBodyRecord>& records, double dt,
                                double box_half, bool augment);

// ---- sequence prediction ----

struct TraceStep {
  RigidBodyRecord state;
  WallLabel attention_decision = WallLabel::kNone;
  bool used_collision_net = false;
  bool out_of_domain = false;  // body left the box; prediction continues
};

std::vector<TraceStep> predict_sequence(const AttentionClassifier& attention,
                                        const CollisionStage& collision,
                                        RigidBodyRecord state, int n_steps, double dt,
                                        double box_half);

// Wiring check: the dataset labels act as a perfect attention and the
// recorded pairs supply ground-truth targets; the result should shadow the
// records themselves.
std::vector<RigidBodyRecord> oracle_sequence(const std::vector<RigidBodyRecord>& records,
                                             double dt);

}  // namespace dqrb
