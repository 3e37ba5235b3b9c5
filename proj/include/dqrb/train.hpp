#pragma once

#include <array>
#include <string>
#include <vector>

#include "dqrb/pipeline.hpp"

// Mini-batch SGD training for the attention classifiers and the collision
// nets. Each run selects on validation: the parameters producing the best
// validation result are the ones kept.
namespace dqrb {

struct TrainConfig {
  StageHyper hyper;
  ad::SgdConfig sgd;
  int epochs = 200;
  int batch = 512;
  int patience = 25;             // stop after this many epochs without a new best
  double target_accuracy = 0.0;  // stop once validation accuracy reaches it; 0 = off
  bool weighted_loss = false;    // binary head only: oversample positive columns
  bool augment = true;           // x9 rotation copies of collision records (train split)
  std::uint64_t seed = 0;        // init, shuffling and dropout
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;  // record-level decisions; 0 for collision paths
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double best_val_accuracy = 0.0;
  double initial_val_loss = 0.0;  // validation loss before the first update
};

// CSV with header epoch,lr,loss,accuracy; loss is the validation loss the
// best-model selection runs on.
std::string training_log_csv(const std::vector<EpochLog>& log);

// Record-level decisions in eval mode, batched over all records. The binary
// head scores all six walls per record and applies the threshold rule.
std::vector<WallLabel> predict_labels(const AttentionClassifier& model,
                                      const std::vector<RigidBodyRecord>& records,
                                      double box_half);

double decision_accuracy(const std::vector<WallLabel>& predicted,
                         const std::vector<RigidBodyRecord>& records);

// Decision counts with rows = true label, columns = predicted, classes
// ordered +x, -x, +y, -y, +z, -z, none. Perfect predictions are diagonal.
using ConfusionCounts = std::array<std::array<long, kLabelCount>, kLabelCount>;
ConfusionCounts confusion_counts(const std::vector<WallLabel>& predicted,
                                 const std::vector<RigidBodyRecord>& records);
std::string confusion_csv(const ConfusionCounts& counts);

struct AttentionTraining {
  AttentionClassifier model;
  TrainResult result;
};

// Trains on the train split (optionally augmented), selects on validation
// accuracy (ties broken by validation loss). Throws DegenerateInput when a
// split is empty.
AttentionTraining train_attention(AttentionKind kind, const RecordSplit& split,
                                  double box_half, const TrainConfig& config);

struct CollisionTraining {
  CollisionStage stage;
  std::array<TrainResult, 3> results;  // twist, impulse, angmom
};

// Trains the three collision nets independently on the wall-labeled pairs of
// the train split, each selecting on its own validation MSE.
CollisionTraining train_collision(const RecordSplit& split, double dt, double box_half,
                                  const TrainConfig& config);

}  // namespace dqrb
