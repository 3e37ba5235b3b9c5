#pragma once

#include <string>
#include <vector>

#include "dqrb/autodiff.hpp"
#include "dqrb/dualquat.hpp"
#include "dqrb/util.hpp"

// Dual-quaternion feed-forward building blocks on top of the autodiff graph.
// A layer with R inputs and S outputs stores its weights as one 8S x 8R real
// matrix whose 8x8 blocks are left-multiplication matrices of the underlying
// dual-quaternion weights; forward is then a single gemm per layer.
namespace dqrb {

enum class Activation { kIdentity, kTanh, kTanhshrink, kRelu };

// Only the identity is unit-preserving on dual quaternions.
bool activation_unit_preserving(Activation kind);

ad::Tensor apply_activation(const ad::Tensor& x, Activation kind);

struct DQLinearLayer {
  long in_count = 0;   // R input dual quaternions
  long out_count = 0;  // S output dual quaternions
  bool has_bias = true;
  ad::Tensor weights;  // 8S x 8R
  ad::Tensor bias;     // 8S x 1, unused when has_bias is false
};

// Random layer: each dual-quaternion weight has its 8 components drawn from
// U[-b, b] with b = sqrt(6 / (8R + 8S)) and is embedded as a left-matrix
// block; bias starts at zero.
DQLinearLayer dq_linear_layer(long in_count, long out_count, Rng& rng,
                              const std::string& name, bool with_bias = true);

// Layer from explicit weights w[s][r] (output s, input r) and per-output bias.
DQLinearLayer dq_layer_from_weights(const std::vector<std::vector<DualQuaternion>>& w,
                                    const std::vector<DualQuaternion>& bias,
                                    const std::string& name);

// x is 8R x B (columns are batch samples); result 8S x B.
ad::Tensor dq_layer_forward(const DQLinearLayer& layer, const ad::Tensor& x);

// True when every 8x8 block equals the left matrix of some dual quaternion.
bool dq_layer_blocks_valid(const ad::Mat& weights, double tol = 1e-9);

// Replaces each 8x8 block with the nearest left-matrix block (Frobenius
// projection onto the 8-dimensional block subspace).
void dq_layer_project_blocks(ad::Mat& weights);

std::vector<ad::Tensor> dq_layer_params(const DQLinearLayer& layer);

// Unit weight parameterisation: W = (sqrt(1 - Phi.Phi), Phi),
// We = (-(Psi.Phi)/sqrt(1 - Phi.Phi), Psi), which satisfies both unit
// constraints |W| = 1 and W.We = 0 by construction.
struct UnitDQWeight {
  Eigen::Vector3d phi;
  Eigen::Vector3d psi;
};

// Phi uniform in the ball of radius 0.9, Psi uniform in [-0.5, 0.5]^3.
UnitDQWeight unit_weight_init(Rng& rng);

DualQuaternion assemble_unit_weight(const UnitDQWeight& w);

// Product neuron: sigma(prod_i W_i X_i) over unit operands. Only a
// unit-preserving activation is accepted.
DualQuaternion mul_neuron_forward(const std::vector<DualQuaternion>& weights,
                                  const std::vector<DualQuaternion>& inputs,
                                  Activation activation);

}  // namespace dqrb
