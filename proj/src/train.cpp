#include "dqrb/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

namespace dqrb {
namespace {

void fisher_yates(std::vector<long>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.gen() % i]);
}

std::vector<ad::Mat> snapshot(const std::vector<ad::Tensor>& params) {
  std::vector<ad::Mat> values;
  values.reserve(params.size());
  for (const auto& p : params) values.push_back(p.value());
  return values;
}

void restore(std::vector<ad::Tensor>& params, const std::vector<ad::Mat>& values) {
  for (size_t i = 0; i < params.size(); ++i) params[i].value() = values[i];
}

ad::Mat gather(const ad::Mat& x, const std::vector<long>& idx, long begin, long end) {
  ad::Mat out(x.rows(), end - begin);
  for (long j = begin; j < end; ++j) out.col(j - begin) = x.col(idx[j]);
  return out;
}

// Shared epoch loop: per-batch loss comes from `batch_loss(first, last)` over
// a shuffled index range; validation metrics from `validate()` as
// {loss, accuracy}. Selection prefers higher accuracy, then lower loss.
TrainResult run_epochs(std::vector<ad::Tensor> params, std::vector<long> order,
                       const TrainConfig& config, Rng& rng,
                       const std::function<ad::Tensor(const std::vector<long>&, long, long)>&
                           batch_loss,
                       const std::function<std::pair<double, double>()>& validate) {
  const long n_samples = static_cast<long>(order.size());
  TrainResult result;
  auto [loss0, acc0] = validate();
  result.initial_val_loss = loss0;
  result.best_val_loss = loss0;
  result.best_val_accuracy = acc0;
  std::vector<ad::Mat> best = snapshot(params);

  ad::Sgd sgd{params, config.sgd};
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    fisher_yates(order, rng);
    double loss_sum = 0.0;
    for (long begin = 0; begin < n_samples; begin += config.batch) {
      long end = std::min<long>(begin + config.batch, n_samples);
      ad::Tensor loss = batch_loss(order, begin, end);
      sgd.zero_grad();
      ad::backward(loss);
      sgd.step(epoch);
      loss_sum += loss.value()(0, 0) * static_cast<double>(end - begin);
    }
    auto [val_loss, val_accuracy] = validate();
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = sgd.lr_at(epoch);
    entry.train_loss = loss_sum / static_cast<double>(n_samples);
    entry.val_loss = val_loss;
    entry.val_accuracy = val_accuracy;
    result.log.push_back(entry);
    log_debug("epoch " + std::to_string(epoch) + " val_loss " + format_double(val_loss) +
              " val_acc " + format_double(val_accuracy));

    bool improved = val_accuracy > result.best_val_accuracy ||
                    (val_accuracy == result.best_val_accuracy &&
                     val_loss < result.best_val_loss);
    if (improved) {
      result.best_epoch = epoch;
      result.best_val_loss = val_loss;
      result.best_val_accuracy = val_accuracy;
      best = snapshot(params);
    }
    if (config.target_accuracy > 0.0 && result.best_val_accuracy >= config.target_accuracy)
      break;
    if (epoch - result.best_epoch >= config.patience) break;
  }
  restore(params, best);
  return result;
}

double eval_loss(const ad::Tensor& loss) { return loss.value()(0, 0); }

}  // namespace

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,lr,loss,accuracy\n";
  for (const EpochLog& e : log) {
    out += std::to_string(e.epoch);
    out += ',';
    out += format_double(e.lr);
    out += ',';
    out += format_double(e.val_loss);
    out += ',';
    out += format_double(e.val_accuracy);
    out += '\n';
  }
  return out;
}

std::vector<WallLabel> predict_labels(const AttentionClassifier& model,
                                      const std::vector<RigidBodyRecord>& records,
                                      double box_half) {
  std::vector<WallLabel> out;
  out.reserve(records.size());
  Rng scratch(0);
  if (model.kind == AttentionKind::kMulti) {
    ad::Mat x(8 * kInputCount, records.size());
    for (size_t k = 0; k < records.size(); ++k)
      x.col(k) = input_column(encode_inputs(records[k], box_half));
    ad::Tensor probs =
        ad::softmax(attention_logits(model, ad::constant(x), false, scratch));
    for (size_t k = 0; k < records.size(); ++k) {
      std::vector<double> p(kClassCount);
      for (int c = 0; c < kClassCount; ++c) p[c] = probs.value()(c, k);
      out.push_back(interface_select(p, AttentionKind::kMulti));
    }
  } else {
    ad::Mat x(8 * kReducedCount, records.size() * kWallCount);
    for (size_t k = 0; k < records.size(); ++k) {
      InputSet in = encode_inputs(records[k], box_half);
      for (int w = 1; w <= kWallCount; ++w)
        x.col(k * kWallCount + w - 1) = reduced_column(in, static_cast<WallLabel>(w));
    }
    ad::Tensor probs =
        ad::sigmoid(attention_logits(model, ad::constant(x), false, scratch));
    for (size_t k = 0; k < records.size(); ++k) {
      std::vector<double> p(kWallCount);
      for (int w = 0; w < kWallCount; ++w) p[w] = probs.value()(0, k * kWallCount + w);
      out.push_back(interface_select(p, AttentionKind::kBinary));
    }
  }
  return out;
}

double decision_accuracy(const std::vector<WallLabel>& predicted,
                         const std::vector<RigidBodyRecord>& records) {
  if (predicted.size() != records.size() || records.empty())
    throw DegenerateInput("decision_accuracy: size mismatch or empty");
  long hits = 0;
  for (size_t k = 0; k < records.size(); ++k)
    if (predicted[k] == records[k].collision_label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {
// +x..-z occupy rows 0..5 in enum order, none sits last
int display_index(WallLabel label) {
  return label == WallLabel::kNone ? kWallCount : static_cast<int>(label) - 1;
}
}  // namespace

ConfusionCounts confusion_counts(const std::vector<WallLabel>& predicted,
                                 const std::vector<RigidBodyRecord>& records) {
  if (predicted.size() != records.size() || records.empty())
    throw DegenerateInput("confusion_counts: size mismatch or empty");
  ConfusionCounts counts{};
  for (size_t k = 0; k < records.size(); ++k)
    ++counts[display_index(records[k].collision_label)][display_index(predicted[k])];
  return counts;
}

std::string confusion_csv(const ConfusionCounts& counts) {
  auto name = [](int idx) {
    return wall_label_name(idx == kWallCount ? WallLabel::kNone
                                             : static_cast<WallLabel>(idx + 1));
  };
  std::string out = "label";
  for (int c = 0; c < kLabelCount; ++c) out += std::string(",") + name(c);
  out += "\n";
  for (int r = 0; r < kLabelCount; ++r) {
    out += name(r);
    for (int c = 0; c < kLabelCount; ++c) out += "," + std::to_string(counts[r][c]);
    out += "\n";
  }
  return out;
}

AttentionTraining train_attention(AttentionKind kind, const RecordSplit& split,
                                  double box_half, const TrainConfig& config) {
  if (split.train.empty() || split.validation.empty())
    throw DegenerateInput("train_attention: empty split");
  Rng rng(config.seed);
  AttentionTraining out;
  out.model = make_attention(kind, config.hyper, rng);

  if (kind == AttentionKind::kMulti) {
    AttentionData train = attention_dataset(split.train, box_half, config.augment);
    AttentionData val = attention_dataset(split.validation, box_half, false);
    std::vector<long> order(train.cls.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);

    auto batch_loss = [&](const std::vector<long>& idx, long begin, long end) {
      std::vector<int> cls(end - begin);
      for (long j = begin; j < end; ++j) cls[j - begin] = train.cls[idx[j]];
      ad::Tensor x = ad::constant(gather(train.x, idx, begin, end));
      return ad::cross_entropy(attention_logits(out.model, x, true, rng), cls);
    };
    auto validate = [&]() {
      Rng scratch(0);
      double loss = eval_loss(ad::cross_entropy(
          attention_logits(out.model, ad::constant(val.x), false, scratch), val.cls));
      double acc = decision_accuracy(predict_labels(out.model, split.validation, box_half),
                                     split.validation);
      return std::make_pair(loss, acc);
    };
    out.result = run_epochs(attention_params(out.model), std::move(order), config, rng,
                            batch_loss, validate);
    return out;
  }

  BinaryData train = binary_dataset(split.train, box_half, config.augment);
  BinaryData val = binary_dataset(split.validation, box_half, false);
  std::vector<long> order;
  long positives = 0;
  for (double v : train.y) positives += v == 1.0 ? 1 : 0;
  // the flagged imbalance fix: repeat each positive column so the sampler
  // sees roughly one positive per negative (equivalent in expectation to a
  // class-weighted BCE)
  long repeat = 1;
  if (config.weighted_loss && positives > 0) {
    long negatives = static_cast<long>(train.y.size()) - positives;
    repeat = std::max<long>(1, negatives / positives);
  }
  for (size_t i = 0; i < train.y.size(); ++i) {
    order.push_back(static_cast<long>(i));
    if (train.y[i] == 1.0)
      for (long r = 1; r < repeat; ++r) order.push_back(static_cast<long>(i));
  }

  auto batch_loss = [&](const std::vector<long>& idx, long begin, long end) {
    std::vector<double> y(end - begin);
    for (long j = begin; j < end; ++j) y[j - begin] = train.y[idx[j]];
    ad::Tensor x = ad::constant(gather(train.x, idx, begin, end));
    return ad::binary_cross_entropy(attention_logits(out.model, x, true, rng), y);
  };
  auto validate = [&]() {
    Rng scratch(0);
    double loss = eval_loss(ad::binary_cross_entropy(
        attention_logits(out.model, ad::constant(val.x), false, scratch), val.y));
    double acc = decision_accuracy(predict_labels(out.model, split.validation, box_half),
                                   split.validation);
    return std::make_pair(loss, acc);
  };
  out.result = run_epochs(attention_params(out.model), std::move(order), config, rng,
                          batch_loss, validate);
  return out;
}

CollisionTraining train_collision(const RecordSplit& split, double dt, double box_half,
                                  const TrainConfig& config) {
  if (split.train.empty() || split.validation.empty())
    throw DegenerateInput("train_collision: empty split");
  CollisionData train = collision_dataset(split.train, dt, box_half, config.augment);
  CollisionData val = collision_dataset(split.validation, dt, box_half, false);

  Rng rng(config.seed);
  CollisionTraining out;
  out.stage.twist = make_collision_net(config.hyper, rng, "twist");
  out.stage.impulse = make_collision_net(config.hyper, rng, "impulse");
  out.stage.angmom = make_collision_net(config.hyper, rng, "angmom");

  struct Path {
    CollisionNet* net;
    const ad::Mat* target_train;
    const ad::Mat* target_val;
    TrainResult* result;
  };
  Path paths[3] = {{&out.stage.twist, &train.twist, &val.twist, &out.results[0]},
                   {&out.stage.impulse, &train.impulse, &val.impulse, &out.results[1]},
                   {&out.stage.angmom, &train.angmom, &val.angmom, &out.results[2]}};

  for (Path& path : paths) {
    std::vector<long> order(train.x.cols());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);
    auto batch_loss = [&](const std::vector<long>& idx, long begin, long end) {
      ad::Tensor x = ad::constant(gather(train.x, idx, begin, end));
      return ad::mse(collision_forward(*path.net, x, true, rng),
                     gather(*path.target_train, idx, begin, end));
    };
    auto validate = [&]() {
      Rng scratch(0);
      double loss = eval_loss(
          ad::mse(collision_forward(*path.net, ad::constant(val.x), false, scratch),
                  *path.target_val));
      return std::make_pair(loss, 0.0);
    };
    std::vector<ad::Tensor> params;
    for (const auto& layer : {path.net->l1, path.net->l2, path.net->out})
      for (const auto& p : dq_layer_params(layer)) params.push_back(p);
    *path.result = run_epochs(std::move(params), std::move(order), config, rng, batch_loss,
                              validate);
  }
  return out;
}

}  // namespace dqrb
