#include "dqrb/attention.hpp"

#include <cmath>

#include "dqrb/errors.hpp"

namespace dqrb {

namespace {

bool same_set(const DQSet& a, const DQSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((dq_to_vec8(a[i]) - dq_to_vec8(b[i])).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

ad::Mat stack(const DQSet& dqs) {
  ad::Mat m(8 * static_cast<long>(dqs.size()), 1);
  for (std::size_t i = 0; i < dqs.size(); ++i)
    m.block<8, 1>(8 * static_cast<long>(i), 0) = dq_to_vec8(dqs[i]);
  return m;
}

// Maps are defined per score entry; matrix scores flatten row-major.
std::vector<const DualQuaternion*> flatten(const AttentionScores& a) {
  std::vector<const DualQuaternion*> out;
  if (a.is_matrix()) {
    for (const auto& row : a.mat)
      for (const auto& s : row) out.push_back(&s);
  } else {
    for (const auto& s : a.vec) out.push_back(&s);
  }
  return out;
}

}  // namespace

AttentionScores additive_scores(const DQSet& keys, const DQSet& queries,
                                const DQLinearLayer& w1, const DQLinearLayer& w2) {
  if (keys.empty() || queries.empty())
    throw ShapeError("additive_scores: empty key or query set");
  if (w1.has_bias || w2.has_bias)
    throw ConfigError("additive_scores: layers must be bias-free");

  // With identical keys and queries the keys alone carry the information.
  DQSet input = keys;
  if (!same_set(keys, queries))
    input.insert(input.end(), queries.begin(), queries.end());

  auto h = dq_layer_forward(w1, ad::constant(stack(input)));
  auto out = dq_layer_forward(w2, h);

  AttentionScores scores;
  for (long s = 0; s < w2.out_count; ++s)
    scores.vec.push_back(dq_from_vec8(out.value().block<8, 1>(8 * s, 0)));
  return scores;
}

AttentionScores mult_scores(const DQSet& k, const DQSet& q) {
  if (k.size() != q.size() || k.empty())
    throw ShapeError("mult_scores: key and query counts must match");
  AttentionScores scores;
  for (std::size_t i = 0; i < k.size(); ++i)
    scores.vec.push_back(dq_mul(k[i], dq_conj(q[i])));
  return scores;
}

AttentionScores mult_scores_matrix(const DQSet& k, const DQSet& q) {
  if (k.size() != q.size() || k.empty())
    throw ShapeError("mult_scores_matrix: key and query counts must match");
  AttentionScores scores;
  scores.mat.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      scores.mat[i].push_back(dq_mul(k[i], dq_conj(q[j])));
  return scores;
}

AttentionScores mult_scores_weighted(const DQSet& k, const DQSet& q, const DQSet& wk,
                                     const DQSet& wq, WeightSide side, bool fused) {
  if (k.size() != q.size() || wk.size() != k.size() || wq.size() != k.size() || k.empty())
    throw ShapeError("mult_scores_weighted: all sets must share one length");
  if (fused && side == WeightSide::kLeft)
    throw ConfigError("mult_scores_weighted: fusing requires the right-side form");
  if (fused && same_set(wk, wq))
    throw ConfigError("mult_scores_weighted: fusing shared weights is excluded");

  AttentionScores scores;
  for (std::size_t i = 0; i < k.size(); ++i) {
    DualQuaternion a;
    if (side == WeightSide::kLeft) {
      // W^K K (W^Q Q)* = W^K K Q* W^Q*
      a = dq_mul(dq_mul(wk[i], k[i]), dq_mul(dq_conj(q[i]), dq_conj(wq[i])));
    } else if (fused) {
      DualQuaternion f = dq_mul(wk[i], dq_conj(wq[i]));
      a = dq_mul(dq_mul(k[i], f), dq_conj(q[i]));
    } else {
      a = dq_mul(dq_mul(k[i], wk[i]), dq_mul(dq_conj(wq[i]), dq_conj(q[i])));
    }
    scores.vec.push_back(a);
  }
  return scores;
}

std::vector<double> map_cosine(const AttentionScores& a, const DualQuaternion& target) {
  Vec8 t = dq_to_vec8(target);
  double tn = t.norm();
  if (tn == 0.0) throw DegenerateInput("map_cosine: zero-norm target");
  std::vector<double> out;
  for (const DualQuaternion* s : flatten(a)) {
    Vec8 v = dq_to_vec8(*s);
    double vn = v.norm();
    if (vn == 0.0) throw DegenerateInput("map_cosine: zero-norm score");
    out.push_back(t.dot(v) / (tn * vn));
  }
  return out;
}

std::vector<double> map_mse(const AttentionScores& a, const DualQuaternion& target,
                            bool printed_form) {
  Vec8 t = dq_to_vec8(target);
  std::vector<double> out;
  for (const DualQuaternion* s : flatten(a)) {
    double d = (t - dq_to_vec8(*s)).squaredNorm();
    double e = printed_form ? std::exp(1.0 / -d) : std::exp(-1.0 / d);
    out.push_back(2.0 * (1.0 / (1.0 + e) - 0.5));
  }
  return out;
}

std::vector<double> map_error_dq(const AttentionScores& a, const DualQuaternion& target,
                                 double alpha) {
  std::vector<double> out;
  for (const DualQuaternion* s : flatten(a)) {
    DualQuaternion e = dq_mul(dq_conj(target), *s);
    Quat t = q_scale(q_mul(q_conj(e.real), e.dual), 2.0);
    out.push_back(alpha * e.real.w - q_vec_norm(t));
  }
  return out;
}

AttentionScores scalar_to_dq(const std::vector<double>& a) {
  AttentionScores scores;
  for (double s : a) scores.vec.push_back({{s, 0, 0, 0}, {0, 0, 0, 0}});
  return scores;
}

AttentionScores scalar_to_dq_matrix(const std::vector<std::vector<double>>& a) {
  AttentionScores scores;
  scores.mat.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != a.size())
      throw ShapeError("scalar_to_dq_matrix: scores must be square");
    for (double s : a[i]) scores.mat[i].push_back({{s, 0, 0, 0}, {0, 0, 0, 0}});
  }
  return scores;
}

DQSet apply_attention(const AttentionScores& scores, const DQSet& v, const DQSet& wv,
                      ApplyMode mode) {
  std::size_t r = v.size();
  if (r == 0) throw ShapeError("apply_attention: empty values");
  if (mode != ApplyMode::kTransformer && !wv.empty())
    throw ShapeError("apply_attention: value weights only apply in transformer mode");

  DQSet out;
  switch (mode) {
    case ApplyMode::kVector: {
      if (scores.is_matrix() || scores.vec.size() != r)
        throw ShapeError("apply_attention: vector mode needs one score per value");
      for (std::size_t i = 0; i < r; ++i) out.push_back(dq_mul(scores.vec[i], v[i]));
      return out;
    }
    case ApplyMode::kMatrix:
    case ApplyMode::kTransformer: {
      if (!scores.is_matrix() || scores.mat.size() != r)
        throw ShapeError("apply_attention: matrix mode needs an RxR score matrix");
      bool weighted = mode == ApplyMode::kTransformer;
      if (weighted && wv.size() != r)
        throw ShapeError("apply_attention: transformer mode needs one weight per value");
      for (std::size_t i = 0; i < r; ++i) {
        if (scores.mat[i].size() != r)
          throw ShapeError("apply_attention: ragged score matrix");
        DualQuaternion acc{{0, 0, 0, 0}, {0, 0, 0, 0}};
        for (std::size_t j = 0; j < r; ++j) {
          DualQuaternion vj = weighted ? dq_mul(wv[j], v[j]) : v[j];
          acc = dq_add(acc, dq_mul(scores.mat[i][j], vj));
        }
        out.push_back(acc);
      }
      return out;
    }
  }
  throw ConfigError("apply_attention: unknown mode");
}

DualQuaternion dq_unit_inverse(const DualQuaternion& q) {
  if (!dq_is_unit(q)) throw DegenerateInput("dq_unit_inverse: operand must be unit");
  return dq_conj(q);
}

DQSet unit_preserving_attention(const std::vector<double>& a, const DQSet& v,
                                const DQSet& wv) {
  if (a.size() != v.size() || wv.size() != v.size() || v.empty())
    throw ShapeError("unit_preserving_attention: sizes must match");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!dq_is_unit(v[i]))
      throw DegenerateInput("unit_preserving_attention: non-unit value");
    if (!dq_is_unit(wv[i]))
      throw DegenerateInput("unit_preserving_attention: non-unit weight");
  }
  DQSet out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    DualQuaternion wvi = dq_mul(wv[i], v[i]);
    DualQuaternion lambda = a[i] > 0.5 ? dq_identity() : dq_unit_inverse(wvi);
    out.push_back(dq_mul(lambda, wvi));
  }
  return out;
}

}  // namespace dqrb
