#pragma once

#include <vector>

#include "dqrb/dqnn.hpp"
#include "dqrb/dualquat.hpp"

// Attention over sets of dual quaternions, in four stages: scores in DQ
// space, DQ-to-scalar mapping, scalar-to-DQ lifting, and application to the
// values.
namespace dqrb {

using DQSet = std::vector<DualQuaternion>;

// Scores carry either one dual quaternion per input (vector form) or one per
// input pair (matrix form); exactly one of the two containers is populated.
struct AttentionScores {
  std::vector<DualQuaternion> vec;
  std::vector<std::vector<DualQuaternion>> mat;

  bool is_matrix() const { return !mat.empty(); }
};

// Two bias-free layers over the keys (or over keys stacked above queries when
// the two sets differ): A = W2 (W1 X).
AttentionScores additive_scores(const DQSet& keys, const DQSet& queries,
                                const DQLinearLayer& w1, const DQLinearLayer& w2);

// Similarity through conjugated queries: A_i = K_i Q_i*.
AttentionScores mult_scores(const DQSet& k, const DQSet& q);
// All-pairs form: A_ij = K_i Q_j*. With K == Q the diagonal is the identity
// and (i, j) and (j, i) are mutual conjugates.
AttentionScores mult_scores_matrix(const DQSet& k, const DQSet& q);

enum class WeightSide { kLeft, kRight };

// Weighted similarity. Left: W_i^K K_i Q_i* W_i^Q*. Right: K_i W_i^K W_i^Q* Q_i*.
// fused pre-multiplies W_i^K W_i^Q* once (right side only); fusing shared
// weights is rejected because W W* would collapse the transformation.
AttentionScores mult_scores_weighted(const DQSet& k, const DQSet& q, const DQSet& wk,
                                     const DQSet& wq, WeightSide side, bool fused);

// Scores and target as 8-vectors: cosine of the enclosed angle, in [-1, 1].
std::vector<double> map_cosine(const AttentionScores& a, const DualQuaternion& target);

// Squared 8-vector distance d squashed by 2(1/(1 + exp(-1/d)) - 0.5): 1 at
// d = 0, falling towards 0 as d grows. printed_form evaluates the exponent as
// 1/(-d), which is bit-identical in IEEE arithmetic; both are kept callable.
std::vector<double> map_mse(const AttentionScores& a, const DualQuaternion& target,
                            bool printed_form = false);

// Error dual quaternion E = T* A (unit operands assumed): alpha * E.real.w
// minus the translation magnitude |vec(2 E* E_eps)|; at most alpha, reached
// when A == T.
std::vector<double> map_error_dq(const AttentionScores& a, const DualQuaternion& target,
                                 double alpha);

// Scalar scores lifted back to DQ space as a_i times the identity.
AttentionScores scalar_to_dq(const std::vector<double>& a);
AttentionScores scalar_to_dq_matrix(const std::vector<std::vector<double>>& a);

enum class ApplyMode { kVector, kMatrix, kTransformer };

// Vector: C_i = L_i V_i. Matrix: C_i = sum_j L_ij V_j. Transformer:
// C_i = sum_j L_ij W_j V_j (matrix scores with pre-transformed values, wv
// required and only allowed there).
DQSet apply_attention(const AttentionScores& scores, const DQSet& v, const DQSet& wv,
                      ApplyMode mode);

// Inverse of a unit dual quaternion, which is its conjugate.
DualQuaternion dq_unit_inverse(const DualQuaternion& q);

// Multiplication-only variant: out_i = L_i (W_i V_i) with L_i the identity
// when a_i > 0.5 and (W_i V_i)^-1 otherwise, so every output stays unit.
DQSet unit_preserving_attention(const std::vector<double>& a, const DQSet& v,
                                const DQSet& wv);

}  // namespace dqrb
