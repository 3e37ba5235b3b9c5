#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

// Minimal reverse-mode autodiff over dense real matrices. Graphs are built
// per forward pass; columns are batch samples throughout.
namespace dqrb::ad {

using Mat = Eigen::MatrixXd;

struct Node {
  Mat value;
  Mat grad;  // allocated lazily by backward()
  bool requires_grad = false;
  std::string name;  // non-empty for named parameters
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;
};

struct Tensor {
  std::shared_ptr<Node> node;

  const Mat& value() const { return node->value; }
  Mat& value() { return node->value; }
  const Mat& grad() const { return node->grad; }
  long rows() const { return node->value.rows(); }
  long cols() const { return node->value.cols(); }
};

// Leaf without gradient tracking.
Tensor constant(Mat value);
// Trainable leaf; the name keys checkpoints.
Tensor param(Mat value, std::string name);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);        // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_bias(const Tensor& a, const Tensor& bias);  // bias Nx1 over columns
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, long row0, long nrows);

Tensor tanh(const Tensor& a);
Tensor tanhshrink(const Tensor& a);  // x - tanh(x)
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

// Column-wise softmax (max-shifted).
Tensor softmax(const Tensor& a);

// Inverted dropout: scales kept entries by 1/(1-p) so the expectation is the
// identity; eval mode passes through. p in [0, 1).
Tensor dropout(const Tensor& a, double p, bool train, Rng& rng);

// Column-wise Hamilton product of 4xB quaternion stacks.
Tensor quatmul(const Tensor& a, const Tensor& b);
Tensor quatconj(const Tensor& a);

Tensor colsum(const Tensor& a);                      // 1xB sum over rows
Tensor sqrt_eltwise(const Tensor& a, double eps);    // sqrt(x + eps)
Tensor div_colbcast(const Tensor& a, const Tensor& r);  // a(:,j) / r(0,j)
Tensor mul_colbcast(const Tensor& a, const Tensor& r);  // a(:,j) * r(0,j)

// Mean cross-entropy over batch columns from logits (fused log-softmax).
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);
// Mean binary cross-entropy from logits (fused log-sigmoid), logits 1xB.
Tensor binary_cross_entropy(const Tensor& logits, const std::vector<double>& targets);
// Mean squared error over all entries against a constant target.
Tensor mse(const Tensor& a, const Mat& target);

// Reverse pass from a scalar loss (1x1); accumulates into parameter grads.
void backward(const Tensor& loss);

enum class Schedule { kNone, kExponential, kStep };

struct SgdConfig {
  double lr = 1e-2;
  Schedule schedule = Schedule::kNone;
  double gamma = 0.9995;    // exponential decay per epoch
  int step_every = 1000;    // halve every N epochs
  double step_factor = 0.5;
};

// Plain SGD; lr_at(epoch) is strictly positive and non-increasing.
struct Sgd {
  std::vector<Tensor> params;
  SgdConfig config;

  double lr_at(int epoch) const;
  void step(int epoch);
  void zero_grad();
};

// Versioned JSON checkpoint of named parameter matrices.
inline constexpr int kCheckpointVersion = 1;
std::string checkpoint_to_json(const std::vector<Tensor>& params,
                               const std::string& model_kind);
// Loads values into matching names; throws SchemaError on version/field
// mismatch and ShapeError on shape mismatch.
void checkpoint_from_json(const std::string& text, const std::string& model_kind,
                          std::vector<Tensor>& params);

}  // namespace dqrb::ad
