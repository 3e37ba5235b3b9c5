#include <doctest.h>

#include <cmath>
#include <vector>

#include "dqrb/errors.hpp"
#include "dqrb/train.hpp"

using namespace dqrb;

namespace {

RecordSplit desk_split(int n_records, std::uint64_t seed) {
  SimConfig config = desk_preset();
  config.n_records = n_records;
  return split_records(simulate(config, seed));
}

TrainConfig tiny_config() {
  TrainConfig config;
  config.hyper.hidden1 = 4;
  config.hyper.hidden2 = 4;
  config.hyper.dropout = 0.1;
  config.sgd.lr = 1e-2;
  config.sgd.schedule = ad::Schedule::kExponential;
  config.epochs = 3;
  config.batch = 64;
  config.patience = 50;
  config.seed = 7;
  return config;
}

}  // namespace

TEST_CASE("training log CSV: spec columns, shortest-roundtrip numbers") {
  std::vector<EpochLog> log = {{1, 0.01, 1.5, 1.25, 0.5}, {2, 0.005, 1.0, 0.75, 0.625}};
  CHECK(training_log_csv(log) ==
        "epoch,lr,loss,accuracy\n1,0.01,1.25,0.5\n2,0.005,0.75,0.625\n");
}

TEST_CASE("multi training: logged epochs, schedule, and determinism") {
  RecordSplit split = desk_split(120, 21);
  TrainConfig config = tiny_config();

  AttentionTraining a = train_attention(AttentionKind::kMulti, split, 0.2, config);
  REQUIRE(a.result.log.size() == 3);
  CHECK(a.result.log[0].epoch == 1);
  CHECK(a.result.log[0].lr ==
        doctest::Approx(config.sgd.lr * config.sgd.gamma).epsilon(1e-15));
  CHECK(a.result.log[2].lr ==
        doctest::Approx(config.sgd.lr * std::pow(config.sgd.gamma, 3)).epsilon(1e-15));
  for (const EpochLog& e : a.result.log) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(std::isfinite(e.val_loss));
    CHECK(e.val_accuracy >= 0.0);
    CHECK(e.val_accuracy <= 1.0);
  }
  CHECK(a.result.best_epoch >= 0);
  CHECK(a.result.best_epoch <= 3);

  AttentionTraining b = train_attention(AttentionKind::kMulti, split, 0.2, config);
  CHECK(training_log_csv(a.result.log) == training_log_csv(b.result.log));
  auto pa = predict_labels(a.model, split.test, 0.2);
  auto pb = predict_labels(b.model, split.test, 0.2);
  CHECK(pa == pb);
}

TEST_CASE("binary training: runs, and oversampling enlarges the epoch") {
  RecordSplit split = desk_split(120, 22);
  TrainConfig config = tiny_config();
  config.epochs = 2;
  config.augment = false;

  AttentionTraining plain = train_attention(AttentionKind::kBinary, split, 0.2, config);
  REQUIRE(plain.result.log.size() == 2);
  CHECK(std::isfinite(plain.result.log[1].val_loss));

  config.weighted_loss = true;
  AttentionTraining weighted = train_attention(AttentionKind::kBinary, split, 0.2, config);
  // 1 positive per 6 columns: oversampling repeats positives ~5x, so the
  // training loss is averaged over more samples but stays finite
  REQUIRE(weighted.result.log.size() == 2);
  CHECK(std::isfinite(weighted.result.log[1].train_loss));
}

TEST_CASE("early stop: target accuracy and patience both cut the run") {
  RecordSplit split = desk_split(120, 23);
  TrainConfig config = tiny_config();
  config.epochs = 40;
  config.target_accuracy = 0.01;  // any decision rate clears this immediately
  AttentionTraining quick = train_attention(AttentionKind::kMulti, split, 0.2, config);
  CHECK(quick.result.log.size() == 1);

  config.target_accuracy = 0.0;
  config.patience = 2;
  config.sgd.lr = 1e-30;  // updates too small to ever improve validation
  AttentionTraining stalled = train_attention(AttentionKind::kMulti, split, 0.2, config);
  CHECK(stalled.result.log.size() <= 4);
}

TEST_CASE("collision training: three paths, validation loss drops") {
  RecordSplit split = desk_split(400, 24);
  TrainConfig config = tiny_config();
  config.hyper.hidden1 = 8;
  config.hyper.hidden2 = 8;
  config.hyper.dropout = 0.0;
  config.sgd.lr = 1e-2;
  config.batch = 128;
  config.epochs = 10;

  CollisionTraining t = train_collision(split, 0.1, 0.2, config);
  for (const TrainResult& r : t.results) {
    REQUIRE(!r.log.empty());
    CHECK(r.best_val_loss < r.initial_val_loss);
    CHECK(r.log.back().val_loss < r.log.front().val_loss * 1.5);
    CHECK(r.best_val_accuracy == 0.0);
  }
  // the kept parameters must reproduce the best validation loss
  CollisionData val = collision_dataset(split.validation, 0.1, 0.2, false);
  Rng scratch(0);
  ad::Tensor loss = ad::mse(
      collision_forward(t.stage.twist, ad::constant(val.x), false, scratch), val.twist);
  CHECK(loss.value()(0, 0) == doctest::Approx(t.results[0].best_val_loss).epsilon(1e-12));
}

TEST_CASE("confusion matrix: oracle predictions are diagonal, none sits last") {
  std::vector<RigidBodyRecord> records;
  std::vector<WallLabel> oracle;
  // two records per wall, three free-flight ones
  for (int w = 1; w <= 6; ++w)
    for (int k = 0; k < 2; ++k) {
      RigidBodyRecord r;
      r.collision_label = static_cast<WallLabel>(w);
      records.push_back(r);
      oracle.push_back(r.collision_label);
    }
  for (int k = 0; k < 3; ++k) {
    records.push_back({});
    oracle.push_back(WallLabel::kNone);
  }

  ConfusionCounts counts = confusion_counts(oracle, records);
  for (int r = 0; r < kLabelCount; ++r)
    for (int c = 0; c < kLabelCount; ++c)
      CHECK(counts[r][c] == (r == c ? (r == 6 ? 3 : 2) : 0));

  std::string csv = confusion_csv(counts);
  CHECK(csv.rfind("label,+x,-x,+y,-y,+z,-z,none\n", 0) == 0);
  CHECK(csv.find("\nnone,0,0,0,0,0,0,3\n") != std::string::npos);

  // one mistake lands off the diagonal: true +x predicted none
  oracle[0] = WallLabel::kNone;
  ConfusionCounts off = confusion_counts(oracle, records);
  CHECK(off[0][6] == 1);
  CHECK(off[0][0] == 1);

  CHECK_THROWS_AS(confusion_counts({}, {}), DegenerateInput);
  CHECK_THROWS_AS(confusion_counts(oracle, std::vector<RigidBodyRecord>(2)), DegenerateInput);
}

TEST_CASE("prediction helpers: accuracy against a forced baseline") {
  SimConfig config = desk_preset();
  config.n_records = 80;
  auto records = simulate(config, 25);

  // a fresh random multi model decides something for every record
  Rng rng(3);
  StageHyper hyper;
  hyper.hidden1 = 4;
  hyper.hidden2 = 4;
  AttentionClassifier model = make_attention(AttentionKind::kMulti, hyper, rng);
  auto labels = predict_labels(model, records, 0.2);
  REQUIRE(labels.size() == records.size());
  double acc = decision_accuracy(labels, records);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);

  // batched predictions agree with the per-record path
  for (size_t k = 0; k < 5; ++k) {
    InputSet in = encode_inputs(records[k], 0.2);
    CHECK(labels[k] ==
          interface_select(attention_multi_probs(model, in), AttentionKind::kMulti));
  }

  CHECK_THROWS_AS(decision_accuracy({}, {}), DegenerateInput);
  RecordSplit empty;
  CHECK_THROWS_AS(train_attention(AttentionKind::kMulti, empty, 0.2, tiny_config()),
                  DegenerateInput);
  CHECK_THROWS_AS(train_collision(empty, 0.1, 0.2, tiny_config()), DegenerateInput);
}
