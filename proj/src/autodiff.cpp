#include "dqrb/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dqrb::ad {

namespace {

std::shared_ptr<Node> make_node(Mat value, std::vector<Tensor> inputs,
                                std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& t : inputs) {
    n->requires_grad = n->requires_grad || t.node->requires_grad;
    n->inputs.push_back(t.node);
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void accumulate(const std::shared_ptr<Node>& n, const Mat& g) {
  if (!n->requires_grad) return;
  if (n->grad.rows() != n->value.rows() || n->grad.cols() != n->value.cols()) {
    n->grad = Mat::Zero(n->value.rows(), n->value.cols());
  }
  n->grad += g;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

// Column-wise Hamilton product of 4xB stacks.
Mat ham(const Mat& a, const Mat& b) {
  Mat c(4, a.cols());
  auto aw = a.row(0).array(), ax = a.row(1).array(), ay = a.row(2).array(),
       az = a.row(3).array();
  auto bw = b.row(0).array(), bx = b.row(1).array(), by = b.row(2).array(),
       bz = b.row(3).array();
  c.row(0) = aw * bw - ax * bx - ay * by - az * bz;
  c.row(1) = aw * bx + ax * bw + ay * bz - az * by;
  c.row(2) = aw * by - ax * bz + ay * bw + az * bx;
  c.row(3) = aw * bz + ax * by - ay * bx + az * bw;
  return c;
}

Mat conj4(const Mat& a) {
  Mat c = -a;
  c.row(0) = a.row(0);
  return c;
}

}  // namespace

Tensor constant(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return {n};
}

Tensor param(Mat value, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->name = std::move(name);
  return {n};
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()));
  auto an = a.node, bn = b.node;
  return {make_node(a.value() * b.value(), {a, b}, [an, bn](Node& self) {
    accumulate(an, self.grad * bn->value.transpose());
    accumulate(bn, an->value.transpose() * self.grad);
  })};
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto an = a.node, bn = b.node;
  return {make_node(a.value() + b.value(), {a, b}, [an, bn](Node& self) {
    accumulate(an, self.grad);
    accumulate(bn, self.grad);
  })};
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto an = a.node, bn = b.node;
  return {make_node(a.value() - b.value(), {a, b}, [an, bn](Node& self) {
    accumulate(an, self.grad);
    accumulate(bn, -self.grad);
  })};
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias.cols() != 1 || bias.rows() != a.rows())
    throw ShapeError("add_bias: bias must be " + std::to_string(a.rows()) + "x1");
  auto an = a.node, bn = bias.node;
  return {make_node(a.value().colwise() + bias.value().col(0), {a, bias}, [an, bn](Node& self) {
    accumulate(an, self.grad);
    accumulate(bn, self.grad.rowwise().sum());
  })};
}

Tensor scale(const Tensor& a, double s) {
  auto an = a.node;
  return {make_node(s * a.value(), {a}, [an, s](Node& self) {
    accumulate(an, s * self.grad);
  })};
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "hadamard");
  auto an = a.node, bn = b.node;
  return {make_node(a.value().cwiseProduct(b.value()), {a, b}, [an, bn](Node& self) {
    accumulate(an, self.grad.cwiseProduct(bn->value));
    accumulate(bn, self.grad.cwiseProduct(an->value));
  })};
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  long cols = parts[0].cols(), rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Mat v(rows, cols);
  long r = 0;
  for (const auto& p : parts) {
    v.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<std::shared_ptr<Node>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node);
  return {make_node(std::move(v), parts, [nodes](Node& self) {
    long r = 0;
    for (const auto& n : nodes) {
      accumulate(n, self.grad.middleRows(r, n->value.rows()));
      r += n->value.rows();
    }
  })};
}

Tensor slice_rows(const Tensor& a, long row0, long nrows) {
  if (row0 < 0 || nrows <= 0 || row0 + nrows > a.rows())
    throw ShapeError("slice_rows: range out of bounds");
  auto an = a.node;
  return {make_node(a.value().middleRows(row0, nrows), {a}, [an, row0, nrows](Node& self) {
    Mat g = Mat::Zero(an->value.rows(), an->value.cols());
    g.middleRows(row0, nrows) = self.grad;
    accumulate(an, g);
  })};
}

Tensor tanh(const Tensor& a) {
  auto an = a.node;
  Mat v = a.value().array().tanh();
  return {make_node(std::move(v), {a}, [an](Node& self) {
    accumulate(an, (self.grad.array() * (1.0 - self.value.array().square())).matrix());
  })};
}

Tensor tanhshrink(const Tensor& a) {
  auto an = a.node;
  Mat v = a.value().array() - a.value().array().tanh();
  return {make_node(std::move(v), {a}, [an](Node& self) {
    accumulate(an, (self.grad.array() * an->value.array().tanh().square()).matrix());
  })};
}

Tensor relu(const Tensor& a) {
  auto an = a.node;
  Mat v = a.value().cwiseMax(0.0);
  return {make_node(std::move(v), {a}, [an](Node& self) {
    accumulate(an,
               (self.grad.array() * (an->value.array() > 0.0).cast<double>()).matrix());
  })};
}

Tensor sigmoid(const Tensor& a) {
  auto an = a.node;
  Mat v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return {make_node(std::move(v), {a}, [an](Node& self) {
    accumulate(an,
               (self.grad.array() * self.value.array() * (1.0 - self.value.array())).matrix());
  })};
}

Tensor softmax(const Tensor& a) {
  Mat v(a.rows(), a.cols());
  for (long j = 0; j < a.cols(); ++j) {
    Eigen::VectorXd c = a.value().col(j);
    Eigen::ArrayXd e = (c.array() - c.maxCoeff()).exp();
    v.col(j) = e / e.sum();
  }
  auto an = a.node;
  return {make_node(std::move(v), {a}, [an](Node& self) {
    Mat g(self.value.rows(), self.value.cols());
    for (long j = 0; j < self.value.cols(); ++j) {
      Eigen::ArrayXd p = self.value.col(j).array();
      Eigen::ArrayXd u = self.grad.col(j).array();
      double dot = (p * u).sum();
      g.col(j) = (p * (u - dot)).matrix();
    }
    accumulate(an, g);
  })};
}

Tensor dropout(const Tensor& a, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must be in [0, 1)");
  if (!train || p == 0.0) {
    auto an = a.node;
    return {make_node(a.value(), {a}, [an](Node& self) { accumulate(an, self.grad); })};
  }
  Mat mask(a.rows(), a.cols());
  double keep = 1.0 - p;
  for (long j = 0; j < a.cols(); ++j)
    for (long i = 0; i < a.rows(); ++i)
      mask(i, j) = rng.uniform() < p ? 0.0 : 1.0 / keep;
  auto an = a.node;
  return {make_node(a.value().cwiseProduct(mask), {a}, [an, mask](Node& self) {
    accumulate(an, self.grad.cwiseProduct(mask));
  })};
}

Tensor quatmul(const Tensor& a, const Tensor& b) {
  if (a.rows() != 4 || b.rows() != 4 || a.cols() != b.cols())
    throw ShapeError("quatmul: expects matching 4xB stacks");
  auto an = a.node, bn = b.node;
  return {make_node(ham(a.value(), b.value()), {a, b}, [an, bn](Node& self) {
    // c = a x b: grad_a = g x conj(b), grad_b = conj(a) x g (columnwise).
    accumulate(an, ham(self.grad, conj4(bn->value)));
    accumulate(bn, ham(conj4(an->value), self.grad));
  })};
}

Tensor quatconj(const Tensor& a) {
  if (a.rows() != 4) throw ShapeError("quatconj: expects 4xB stack");
  auto an = a.node;
  return {make_node(conj4(a.value()), {a}, [an](Node& self) {
    accumulate(an, conj4(self.grad));
  })};
}

Tensor colsum(const Tensor& a) {
  auto an = a.node;
  return {make_node(a.value().colwise().sum(), {a}, [an](Node& self) {
    accumulate(an, Mat::Ones(an->value.rows(), 1) * self.grad);
  })};
}

Tensor sqrt_eltwise(const Tensor& a, double eps) {
  auto an = a.node;
  Mat v = (a.value().array() + eps).sqrt();
  return {make_node(std::move(v), {a}, [an](Node& self) {
    accumulate(an, (self.grad.array() * 0.5 / self.value.array()).matrix());
  })};
}

Tensor div_colbcast(const Tensor& a, const Tensor& r) {
  if (r.rows() != 1 || r.cols() != a.cols())
    throw ShapeError("div_colbcast: divisor must be 1x" + std::to_string(a.cols()));
  auto an = a.node, rn = r.node;
  Mat inv = r.value().array().inverse();
  Mat v = a.value().array().rowwise() * inv.row(0).array();
  return {make_node(std::move(v), {a, r}, [an, rn](Node& self) {
    Eigen::ArrayXXd inv = rn->value.array().inverse();
    accumulate(an, (self.grad.array().rowwise() * inv.row(0)).matrix());
    Mat gr = -(self.grad.cwiseProduct(self.value)).colwise().sum();
    accumulate(rn, (gr.array().rowwise() * inv.row(0)).matrix());
  })};
}

Tensor mul_colbcast(const Tensor& a, const Tensor& r) {
  if (r.rows() != 1 || r.cols() != a.cols())
    throw ShapeError("mul_colbcast: factor must be 1x" + std::to_string(a.cols()));
  auto an = a.node, rn = r.node;
  Mat v = a.value().array().rowwise() * r.value().row(0).array();
  return {make_node(std::move(v), {a, r}, [an, rn](Node& self) {
    accumulate(an, (self.grad.array().rowwise() * rn->value.row(0).array()).matrix());
    accumulate(rn, self.grad.cwiseProduct(an->value).colwise().sum());
  })};
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
  long k = logits.rows(), b = logits.cols();
  if (static_cast<long>(targets.size()) != b)
    throw ShapeError("cross_entropy: one target per column required");
  for (int t : targets)
    if (t < 0 || t >= k) throw ShapeError("cross_entropy: target class out of range");

  Mat probs(k, b);
  double loss = 0.0;
  for (long j = 0; j < b; ++j) {
    Eigen::VectorXd c = logits.value().col(j);
    double mx = c.maxCoeff();
    Eigen::ArrayXd e = (c.array() - mx).exp();
    double lse = std::log(e.sum()) + mx;
    probs.col(j) = e / e.sum();
    loss += lse - c(targets[j]);
  }
  loss /= static_cast<double>(b);

  auto ln = logits.node;
  Mat v(1, 1);
  v(0, 0) = loss;
  return {make_node(std::move(v), {logits}, [ln, probs, targets](Node& self) {
    double g = self.grad(0, 0) / static_cast<double>(targets.size());
    Mat d = probs * g;
    for (long j = 0; j < d.cols(); ++j) d(targets[j], j) -= g;
    accumulate(ln, d);
  })};
}

Tensor binary_cross_entropy(const Tensor& logits, const std::vector<double>& targets) {
  if (logits.rows() != 1 || static_cast<long>(targets.size()) != logits.cols())
    throw ShapeError("binary_cross_entropy: logits must be 1xB with one target each");
  long b = logits.cols();
  double loss = 0.0;
  for (long j = 0; j < b; ++j) {
    double x = logits.value()(0, j);
    // max(x,0) - x y + log(1 + exp(-|x|)): stable for large |x|
    loss += std::max(x, 0.0) - x * targets[j] + std::log1p(std::exp(-std::abs(x)));
  }
  loss /= static_cast<double>(b);

  auto ln = logits.node;
  Mat v(1, 1);
  v(0, 0) = loss;
  return {make_node(std::move(v), {logits}, [ln, targets](Node& self) {
    double g = self.grad(0, 0) / static_cast<double>(targets.size());
    Mat d(1, static_cast<long>(targets.size()));
    for (long j = 0; j < d.cols(); ++j) {
      double x = ln->value(0, j);
      d(0, j) = g * (1.0 / (1.0 + std::exp(-x)) - targets[j]);
    }
    accumulate(ln, d);
  })};
}

Tensor mse(const Tensor& a, const Mat& target) {
  if (a.rows() != target.rows() || a.cols() != target.cols())
    throw ShapeError("mse: target shape mismatch");
  double n = static_cast<double>(target.size());
  Mat diff = a.value() - target;
  Mat v(1, 1);
  v(0, 0) = diff.squaredNorm() / n;
  auto an = a.node;
  return {make_node(std::move(v), {a}, [an, diff, n](Node& self) {
    accumulate(an, (2.0 / n) * self.grad(0, 0) * diff);
  })};
}

void backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward: loss must be a 1x1 scalar");
  if (!loss.node->requires_grad) return;

  // Post-order DFS gives inputs first; run backwards through the reverse.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node.get(), 0}};
  seen.insert(loss.node.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->inputs.size()) {
      Node* in = n->inputs[idx++].get();
      if (in->requires_grad && !seen.count(in)) {
        seen.insert(in);
        stack.push_back({in, 0});
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Fresh intermediate grads; parameter grads persist and accumulate.
  for (Node* n : order) {
    if (!n->name.empty()) {
      if (n->grad.rows() != n->value.rows() || n->grad.cols() != n->value.cols())
        n->grad = Mat::Zero(n->value.rows(), n->value.cols());
    } else {
      n->grad = Mat::Zero(n->value.rows(), n->value.cols());
    }
  }
  loss.node->grad(0, 0) += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

double Sgd::lr_at(int epoch) const {
  switch (config.schedule) {
    case Schedule::kNone:
      return config.lr;
    case Schedule::kExponential:
      return config.lr * std::pow(config.gamma, epoch);
    case Schedule::kStep:
      return config.lr * std::pow(config.step_factor, epoch / config.step_every);
  }
  return config.lr;
}

void Sgd::step(int epoch) {
  double lr = lr_at(epoch);
  for (auto& p : params) {
    if (p.node->grad.size() == 0) continue;
    p.node->value -= lr * p.node->grad;
  }
}

void Sgd::zero_grad() {
  for (auto& p : params)
    p.node->grad = Mat::Zero(p.node->value.rows(), p.node->value.cols());
}

std::string checkpoint_to_json(const std::vector<Tensor>& params,
                               const std::string& model_kind) {
  nlohmann::json j;
  j["format"] = "dqrb-checkpoint";
  j["version"] = kCheckpointVersion;
  j["model"] = model_kind;
  auto& arr = j["params"] = nlohmann::json::array();
  std::unordered_set<std::string> names;
  for (const auto& p : params) {
    if (p.node->name.empty())
      throw ConfigError("checkpoint: unnamed parameter");
    if (!names.insert(p.node->name).second)
      throw ConfigError("checkpoint: duplicate parameter name " + p.node->name);
    nlohmann::json e;
    e["name"] = p.node->name;
    e["rows"] = p.rows();
    e["cols"] = p.cols();
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.rows() * p.cols()));
    for (long i = 0; i < p.rows(); ++i)           // row-major serialization
      for (long jj = 0; jj < p.cols(); ++jj) data.push_back(p.value()(i, jj));
    e["data"] = std::move(data);
    arr.push_back(std::move(e));
  }
  return j.dump();
}

void checkpoint_from_json(const std::string& text, const std::string& model_kind,
                          std::vector<Tensor>& params) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (j.value("format", "") != "dqrb-checkpoint")
    throw SchemaError("checkpoint: unknown format tag");
  if (j.value("version", -1) != kCheckpointVersion)
    throw SchemaError("checkpoint: unsupported version");
  if (j.value("model", "") != model_kind)
    throw SchemaError("checkpoint: model kind mismatch, expected " + model_kind);

  std::unordered_map<std::string, const nlohmann::json*> by_name;
  for (const auto& e : j.at("params")) by_name[e.at("name")] = &e;
  if (by_name.size() != params.size())
    throw SchemaError("checkpoint: parameter count mismatch");

  for (auto& p : params) {
    auto it = by_name.find(p.node->name);
    if (it == by_name.end())
      throw SchemaError("checkpoint: missing parameter " + p.node->name);
    const auto& e = *it->second;
    long rows = e.at("rows"), cols = e.at("cols");
    if (rows != p.rows() || cols != p.cols())
      throw ShapeError("checkpoint: shape mismatch for " + p.node->name);
    const auto& data = e.at("data");
    if (static_cast<long>(data.size()) != rows * cols)
      throw SchemaError("checkpoint: data length mismatch for " + p.node->name);
    std::size_t idx = 0;
    for (long i = 0; i < rows; ++i)
      for (long jj = 0; jj < cols; ++jj) p.node->value(i, jj) = data[idx++];
  }
}

}  // namespace dqrb::ad
