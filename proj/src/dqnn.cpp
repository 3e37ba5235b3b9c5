#include "dqrb/dqnn.hpp"

#include <cmath>

#include "dqrb/errors.hpp"

namespace dqrb {

bool activation_unit_preserving(Activation kind) { return kind == Activation::kIdentity; }

ad::Tensor apply_activation(const ad::Tensor& x, Activation kind) {
  switch (kind) {
    case Activation::kIdentity:
      return x;
    case Activation::kTanh:
      return ad::tanh(x);
    case Activation::kTanhshrink:
      return ad::tanhshrink(x);
    case Activation::kRelu:
      return ad::relu(x);
  }
  throw ConfigError("apply_activation: unknown kind");
}

namespace {

void place_block(ad::Mat& weights, long s, long r, const DualQuaternion& w) {
  weights.block<8, 8>(8 * s, 8 * r) = dq_matrix_left(w);
}

// First column of a left-matrix block is the generating dual quaternion
// (the block applied to the identity).
DualQuaternion block_generator(const ad::Mat& weights, long s, long r) {
  Vec8 v = weights.block<8, 1>(8 * s, 8 * r);
  return dq_from_vec8(v);
}

}  // namespace

DQLinearLayer dq_linear_layer(long in_count, long out_count, Rng& rng,
                              const std::string& name, bool with_bias) {
  if (in_count <= 0 || out_count <= 0)
    throw ConfigError("dq_linear_layer: counts must be positive");
  double b = std::sqrt(6.0 / static_cast<double>(8 * in_count + 8 * out_count));
  ad::Mat w(8 * out_count, 8 * in_count);
  for (long s = 0; s < out_count; ++s)
    for (long r = 0; r < in_count; ++r) {
      DualQuaternion d{{rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b),
                        rng.uniform(-b, b)},
                       {rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b),
                        rng.uniform(-b, b)}};
      place_block(w, s, r, d);
    }
  DQLinearLayer layer;
  layer.in_count = in_count;
  layer.out_count = out_count;
  layer.has_bias = with_bias;
  layer.weights = ad::param(std::move(w), name + ".w");
  layer.bias = ad::param(ad::Mat::Zero(8 * out_count, 1), name + ".b");
  return layer;
}

DQLinearLayer dq_layer_from_weights(const std::vector<std::vector<DualQuaternion>>& w,
                                    const std::vector<DualQuaternion>& bias,
                                    const std::string& name) {
  if (w.empty() || w[0].empty()) throw ShapeError("dq_layer_from_weights: empty weights");
  long out_count = static_cast<long>(w.size());
  long in_count = static_cast<long>(w[0].size());
  ad::Mat wm(8 * out_count, 8 * in_count);
  for (long s = 0; s < out_count; ++s) {
    if (static_cast<long>(w[s].size()) != in_count)
      throw ShapeError("dq_layer_from_weights: ragged weight rows");
    for (long r = 0; r < in_count; ++r) place_block(wm, s, r, w[s][r]);
  }
  bool with_bias = !bias.empty();
  ad::Mat bm = ad::Mat::Zero(8 * out_count, 1);
  if (with_bias) {
    if (static_cast<long>(bias.size()) != out_count)
      throw ShapeError("dq_layer_from_weights: bias count mismatch");
    for (long s = 0; s < out_count; ++s) bm.block<8, 1>(8 * s, 0) = dq_to_vec8(bias[s]);
  }
  DQLinearLayer layer;
  layer.in_count = in_count;
  layer.out_count = out_count;
  layer.has_bias = with_bias;
  layer.weights = ad::param(std::move(wm), name + ".w");
  layer.bias = ad::param(std::move(bm), name + ".b");
  return layer;
}

ad::Tensor dq_layer_forward(const DQLinearLayer& layer, const ad::Tensor& x) {
  if (x.rows() != 8 * layer.in_count)
    throw ShapeError("dq_layer_forward: input must have " +
                     std::to_string(8 * layer.in_count) + " rows");
  ad::Tensor y = ad::matmul(layer.weights, x);
  if (layer.has_bias) y = ad::add_bias(y, layer.bias);
  return y;
}

bool dq_layer_blocks_valid(const ad::Mat& weights, double tol) {
  if (weights.rows() % 8 != 0 || weights.cols() % 8 != 0) return false;
  for (long s = 0; s < weights.rows() / 8; ++s)
    for (long r = 0; r < weights.cols() / 8; ++r) {
      DualQuaternion g = block_generator(weights, s, r);
      ad::Mat diff = weights.block<8, 8>(8 * s, 8 * r) - dq_matrix_left(g);
      if (diff.cwiseAbs().maxCoeff() > tol) return false;
    }
  return true;
}

void dq_layer_project_blocks(ad::Mat& weights) {
  if (weights.rows() % 8 != 0 || weights.cols() % 8 != 0)
    throw ShapeError("dq_layer_project_blocks: dimensions must be multiples of 8");
  // Basis blocks L(e_k) have disjoint entry positions per component, so the
  // Frobenius projection is a per-component correlation.
  Mat8 basis[8];
  double basis_sq[8];
  for (int k = 0; k < 8; ++k) {
    Vec8 e = Vec8::Zero();
    e(k) = 1.0;
    basis[k] = dq_matrix_left(dq_from_vec8(e));
    basis_sq[k] = basis[k].squaredNorm();
  }
  for (long s = 0; s < weights.rows() / 8; ++s)
    for (long r = 0; r < weights.cols() / 8; ++r) {
      Mat8 block = weights.block<8, 8>(8 * s, 8 * r);
      Mat8 proj = Mat8::Zero();
      for (int k = 0; k < 8; ++k)
        proj += (block.cwiseProduct(basis[k]).sum() / basis_sq[k]) * basis[k];
      weights.block<8, 8>(8 * s, 8 * r) = proj;
    }
}

std::vector<ad::Tensor> dq_layer_params(const DQLinearLayer& layer) {
  if (layer.has_bias) return {layer.weights, layer.bias};
  return {layer.weights};
}

UnitDQWeight unit_weight_init(Rng& rng) {
  UnitDQWeight w;
  do {
    w.phi = rng.vec3(-0.9, 0.9);
  } while (w.phi.norm() > 0.9);
  w.psi = rng.vec3(-0.5, 0.5);
  return w;
}

DualQuaternion assemble_unit_weight(const UnitDQWeight& w) {
  double real_w = std::sqrt(1.0 - w.phi.dot(w.phi));
  double dual_w = -w.psi.dot(w.phi) / real_w;
  return {{real_w, w.phi.x(), w.phi.y(), w.phi.z()},
          {dual_w, w.psi.x(), w.psi.y(), w.psi.z()}};
}

DualQuaternion mul_neuron_forward(const std::vector<DualQuaternion>& weights,
                                  const std::vector<DualQuaternion>& inputs,
                                  Activation activation) {
  if (weights.size() != inputs.size() || weights.empty())
    throw ShapeError("mul_neuron_forward: need matching nonempty weights and inputs");
  if (!activation_unit_preserving(activation))
    throw ConfigError("mul_neuron_forward: activation must be unit-preserving");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!dq_is_unit(weights[i])) throw DegenerateInput("mul_neuron_forward: non-unit weight");
    if (!dq_is_unit(inputs[i])) throw DegenerateInput("mul_neuron_forward: non-unit input");
  }
  DualQuaternion z = dq_identity();
  for (std::size_t i = 0; i < weights.size(); ++i)
    z = dq_mul(z, dq_mul(weights[i], inputs[i]));
  return z;
}

}  // namespace dqrb
