#pragma once

#include "amlkit/nn/topology.hpp"
#include "amlkit/split.hpp"
#include "amlkit/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace amlkit::nn {

enum class ActKind : std::uint8_t { None = 0, Relu = 1, LeakyRelu = 2 };

constexpr Scalar kLeakySlope = 0.2;       // configured activation slope
constexpr Scalar kAttentionSlope = 0.2;   // GAT score nonlinearity slope

template <typename T>
MatT<T> activate(const MatT<T>& pre, ActKind k, T slope = T(kLeakySlope)) {
  switch (k) {
    case ActKind::None:
      return pre;
    case ActKind::Relu:
      return pre.cwiseMax(T(0));
    default:
      return (pre.array() > T(0)).select(pre, slope * pre);
  }
}

template <typename T>
MatT<T> activate_grad(const MatT<T>& pre, ActKind k, T slope = T(kLeakySlope)) {
  switch (k) {
    case ActKind::None:
      return MatT<T>::Ones(pre.rows(), pre.cols());
    case ActKind::Relu:
      return (pre.array() > T(0)).select(MatT<T>::Ones(pre.rows(), pre.cols()),
                                         MatT<T>::Zero(pre.rows(), pre.cols()));
    default:
      return (pre.array() > T(0))
          .select(MatT<T>::Ones(pre.rows(), pre.cols()),
                  MatT<T>::Constant(pre.rows(), pre.cols(), slope));
  }
}

/// Row-wise stable softmax. Every output row sums to 1.
inline Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

// ---------------------------------------------------------------------------
// GCN: H' = act(A_hat * H * W + b), A_hat the symmetric-normalized adjacency.
// ---------------------------------------------------------------------------

struct GcnCache {
  Mat agg;  // A_hat * H
  Mat pre;  // agg * W + b
};

inline Mat gcn_forward(const Topology& topo, const Mat& H, const Mat& W,
                       const RowVec& b, ActKind act, GcnCache* cache = nullptr) {
  if (H.rows() != topo.n) throw ShapeMismatch("gcn: feature rows != node count");
  if (H.cols() != W.rows() || W.cols() != b.size())
    throw ShapeMismatch("gcn: weight shape incompatible");
  Mat agg = topo.a_hat * H;
  Mat pre = agg * W;
  pre.rowwise() += b;
  Mat out = activate(pre, act);
  if (cache) {
    cache->agg = std::move(agg);
    cache->pre = std::move(pre);
  }
  return out;
}

struct GcnGrads {
  Mat dH, dW;
  RowVec db;
};

inline GcnGrads gcn_backward(const Topology& topo, const GcnCache& cache,
                             const Mat& W, ActKind act, const Mat& grad_out) {
  const Mat gpre = grad_out.cwiseProduct(activate_grad(cache.pre, act));
  GcnGrads g;
  g.dW = cache.agg.transpose() * gpre;
  g.db = gpre.colwise().sum();
  g.dH = topo.a_hat * (gpre * W.transpose());  // A_hat is symmetric
  return g;
}

// ---------------------------------------------------------------------------
// GAT, single head. Scores e_ij = leaky(a1.z_i + a2.z_j) over j in N(i)+{i},
// alpha = softmax_j(e_ij), H'_i = act(sum_j alpha_ij z_j + b) with z = H W.
// ---------------------------------------------------------------------------

struct GatCache {
  Mat H;                          // layer input
  Mat Z;                          // H * W
  Mat pre;                        // attention-aggregated pre-activation
  std::vector<Scalar> alpha;      // per (node, slot); slot 0 is self
  std::vector<Scalar> score_pre;  // e_ij before the leaky nonlinearity
};

namespace detail {
// Slot layout: node i owns slots [offsets[i] + i, offsets[i+1] + i + 1),
// slot 0 = self, remaining slots follow the neighbor list order.
inline Index slot_begin(const Topology& topo, Index i) { return topo.offsets[i] + i; }
inline Index slot_count(const Topology& topo, Index i) { return topo.degree(i) + 1; }
}  // namespace detail

inline Mat gat_forward(const Topology& topo, const Mat& H, const Mat& W,
                       const Vec& a, const RowVec& b, ActKind act,
                       GatCache* cache = nullptr) {
  if (H.rows() != topo.n) throw ShapeMismatch("gat: feature rows != node count");
  if (H.cols() != W.rows() || W.cols() != b.size())
    throw ShapeMismatch("gat: weight shape incompatible");
  const Index d_out = W.cols();
  if (a.size() != 2 * d_out) throw ShapeMismatch("gat: attention vector length != 2*out_dim");

  const Mat Z = H * W;
  const Vec src_score = Z * a.head(d_out);  // a1 . z_i
  const Vec dst_score = Z * a.tail(d_out);  // a2 . z_j

  const Index total_slots = topo.offsets[topo.n] + topo.n;
  std::vector<Scalar> score_pre(total_slots), alpha(total_slots);
  Mat pre = Mat::Zero(topo.n, d_out);
  pre.rowwise() += b;

  for (Index i = 0; i < topo.n; ++i) {
    const Index base = detail::slot_begin(topo, i);
    const Index cnt = detail::slot_count(topo, i);
    const auto nbrs = topo.neighbors(i);
    auto slot_target = [&](Index s) { return s == 0 ? i : nbrs[s - 1]; };

    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Index s = 0; s < cnt; ++s) {
      const Scalar raw = src_score[i] + dst_score[slot_target(s)];
      const Scalar e = raw > 0 ? raw : kAttentionSlope * raw;
      score_pre[base + s] = raw;
      alpha[base + s] = e;
      mx = std::max(mx, e);
    }
    Scalar denom = 0;
    for (Index s = 0; s < cnt; ++s) {
      alpha[base + s] = std::exp(alpha[base + s] - mx);
      denom += alpha[base + s];
    }
    for (Index s = 0; s < cnt; ++s) {
      alpha[base + s] /= denom;
      pre.row(i) += alpha[base + s] * Z.row(slot_target(s));
    }
  }

  Mat out = activate(pre, act);
  if (cache) {
    cache->H = H;
    cache->Z = Z;
    cache->pre = std::move(pre);
    cache->alpha = std::move(alpha);
    cache->score_pre = std::move(score_pre);
  }
  return out;
}

/// Attention rows (self + neighbors) for inspection; each sums to 1.
inline std::vector<std::vector<Scalar>> gat_attention_rows(const Topology& topo,
                                                           const GatCache& cache) {
  std::vector<std::vector<Scalar>> rows(topo.n);
  for (Index i = 0; i < topo.n; ++i) {
    const Index base = detail::slot_begin(topo, i);
    rows[i].assign(cache.alpha.begin() + base,
                   cache.alpha.begin() + base + detail::slot_count(topo, i));
  }
  return rows;
}

struct GatGrads {
  Mat dH, dW;
  Vec da;
  RowVec db;
};

inline GatGrads gat_backward(const Topology& topo, const GatCache& cache,
                             const Mat& W, const Vec& a, ActKind act,
                             const Mat& grad_out) {
  const Index d_out = W.cols();
  const Mat gpre = grad_out.cwiseProduct(activate_grad(cache.pre, act));

  Mat dZ = Mat::Zero(cache.Z.rows(), cache.Z.cols());
  Vec da1 = Vec::Zero(d_out), da2 = Vec::Zero(d_out);

  for (Index i = 0; i < topo.n; ++i) {
    const Index base = detail::slot_begin(topo, i);
    const Index cnt = detail::slot_count(topo, i);
    const auto nbrs = topo.neighbors(i);
    auto slot_target = [&](Index s) { return s == 0 ? i : nbrs[s - 1]; };

    // d(alpha) and the softmax Jacobian contraction.
    Scalar weighted_sum = 0;
    std::vector<Scalar> dalpha(cnt);
    for (Index s = 0; s < cnt; ++s) {
      dalpha[s] = gpre.row(i).dot(cache.Z.row(slot_target(s)));
      weighted_sum += cache.alpha[base + s] * dalpha[s];
      dZ.row(slot_target(s)) += cache.alpha[base + s] * gpre.row(i);
    }
    Scalar dsrc = 0;
    for (Index s = 0; s < cnt; ++s) {
      const Scalar de = cache.alpha[base + s] * (dalpha[s] - weighted_sum);
      const Scalar ds = de * (cache.score_pre[base + s] > 0 ? 1.0 : kAttentionSlope);
      dsrc += ds;
      da2 += ds * cache.Z.row(slot_target(s)).transpose();
      dZ.row(slot_target(s)) += ds * a.tail(d_out).transpose();
    }
    da1 += dsrc * cache.Z.row(i).transpose();
    dZ.row(i) += dsrc * a.head(d_out).transpose();
  }

  GatGrads g;
  g.db = gpre.colwise().sum();
  g.dW = cache.H.transpose() * dZ;
  g.dH = dZ * W.transpose();
  g.da.resize(2 * d_out);
  g.da << da1, da2;
  return g;
}

// ---------------------------------------------------------------------------
// GIN: H'_v = MLP((1+eps) h_v + sum_{u in N(v)} h_u), 2-layer MLP whose
// internal nonlinearity is the configured activation.
// ---------------------------------------------------------------------------

struct GinParams {
  Mat W1;
  RowVec b1;
  Mat W2;
  RowVec b2;
};

struct GinCache {
  Mat agg;
  Mat hid_pre;
  Mat hid;
};

inline Mat gin_forward(const Topology& topo, const Mat& H, const GinParams& p,
                       Scalar eps, ActKind act, GinCache* cache = nullptr) {
  if (H.rows() != topo.n) throw ShapeMismatch("gin: feature rows != node count");
  if (H.cols() != p.W1.rows() || p.W1.cols() != p.b1.size() ||
      p.W1.cols() != p.W2.rows() || p.W2.cols() != p.b2.size())
    throw ShapeMismatch("gin: mlp shapes incompatible");

  Mat agg = (1.0 + eps) * H;
  for (Index i = 0; i < topo.n; ++i)
    for (Index j : topo.neighbors(i)) agg.row(i) += H.row(j);

  Mat hid_pre = agg * p.W1;
  hid_pre.rowwise() += p.b1;
  Mat hid = activate(hid_pre, act);
  Mat out = hid * p.W2;
  out.rowwise() += p.b2;
  if (cache) {
    cache->agg = std::move(agg);
    cache->hid_pre = std::move(hid_pre);
    cache->hid = std::move(hid);
  }
  return out;
}

struct GinGrads {
  Mat dH, dW1, dW2;
  RowVec db1, db2;
};

inline GinGrads gin_backward(const Topology& topo, const GinCache& cache,
                             const GinParams& p, Scalar eps, ActKind act,
                             const Mat& grad_out) {
  GinGrads g;
  g.dW2 = cache.hid.transpose() * grad_out;
  g.db2 = grad_out.colwise().sum();
  const Mat dhid_pre =
      (grad_out * p.W2.transpose()).cwiseProduct(activate_grad(cache.hid_pre, act));
  g.dW1 = cache.agg.transpose() * dhid_pre;
  g.db1 = dhid_pre.colwise().sum();

  const Mat dagg = dhid_pre * p.W1.transpose();
  g.dH = (1.0 + eps) * dagg;
  for (Index i = 0; i < topo.n; ++i)
    for (Index j : topo.neighbors(i)) g.dH.row(i) += dagg.row(j);
  return g;
}

// ---------------------------------------------------------------------------
// Class-weighted cross-entropy over masked nodes.
// ---------------------------------------------------------------------------

struct ClassWeights {
  std::array<Scalar, kNumLossClasses> w{1.0, 1.0};
};

/// Inverse-frequency class weights w_c = N / (|C| * N_c) over train labels.
inline ClassWeights class_weights(const std::vector<Label>& labels,
                                  const std::vector<Part>& parts) {
  std::array<std::int64_t, kNumLossClasses> counts{0, 0};
  std::int64_t total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (parts[i] != Part::Train || labels[i] == Label::Unknown) continue;
    ++counts[static_cast<int>(labels[i])];
    ++total;
  }
  ClassWeights cw;
  for (int c = 0; c < kNumLossClasses; ++c) {
    if (counts[c] == 0)
      throw MissingClass(std::string("train mask lacks class ") +
                         label_name(static_cast<Label>(c)));
    cw.w[c] = static_cast<Scalar>(total) /
              (static_cast<Scalar>(kNumLossClasses) * static_cast<Scalar>(counts[c]));
  }
  return cw;
}

struct LossResult {
  Scalar loss = 0;
  Mat dlogits;
};

/// L = -sum_i w_{y_i} log softmax(logits_i)[y_i] over masked nodes, with the
/// exact gradient w.r.t. logits.
inline LossResult weighted_cross_entropy(const Mat& logits,
                                         const std::vector<Label>& labels,
                                         const ClassWeights& weights,
                                         const std::vector<std::uint8_t>& mask) {
  if (static_cast<Index>(labels.size()) != logits.rows() ||
      static_cast<Index>(mask.size()) != logits.rows())
    throw LengthMismatch("loss inputs must align with logit rows");
  if (logits.cols() != kNumLossClasses)
    throw ShapeMismatch("expected one logit column per loss class");

  LossResult r;
  r.dlogits = Mat::Zero(logits.rows(), logits.cols());
  bool any = false;
  for (Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    if (labels[i] == Label::Unknown)
      throw Error("unknown-label node inside the loss mask");
    any = true;
    const int y = static_cast<int>(labels[i]);
    const Scalar w = weights.w[y];
    const Scalar m = logits.row(i).maxCoeff();
    const Scalar lse =
        m + std::log((logits.row(i).array() - m).exp().sum());
    r.loss -= w * (logits(i, y) - lse);
    for (int c = 0; c < kNumLossClasses; ++c) {
      const Scalar p = std::exp(logits(i, c) - lse);
      r.dlogits(i, c) = w * (p - (c == y ? 1.0 : 0.0));
    }
  }
  if (!any) throw EmptyMask("loss mask selects no node");
  return r;
}

}  // namespace amlkit::nn
