#pragma once

#include "amlkit/metrics.hpp"
#include "amlkit/nn/ops.hpp"
#include "amlkit/nn/topology.hpp"
#include "amlkit/quantum/random_source.hpp"
#include "amlkit/split.hpp"
#include "amlkit/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace amlkit::nn {

enum class Backbone : std::uint8_t { Gcn = 0, Gat = 1, Gin = 2 };

inline const char* backbone_name(Backbone b) {
  switch (b) {
    case Backbone::Gcn:
      return "gcn";
    case Backbone::Gat:
      return "gat";
    default:
      return "gin";
  }
}

struct ModelConfig {
  Backbone backbone = Backbone::Gcn;
  std::vector<Index> layer_dims;  // first = feature dim, last = 2
  ActKind activation = ActKind::Relu;
  int attention_heads = 1;  // hook; single head implemented
  Scalar gin_epsilon = 0.0;
  Scalar learning_rate = 0.01;
  int max_epochs = 200;
  int patience = 20;
  std::uint64_t seed = 42;

  void validate() const {
    if (layer_dims.size() < 2) throw Error("layer_dims needs at least 2 entries");
    if (layer_dims.back() != kNumLossClasses)
      throw Error("last layer width must equal the number of loss classes");
    for (Index d : layer_dims)
      if (d <= 0) throw Error("layer widths must be positive");
    if (backbone == Backbone::Gat && attention_heads != 1)
      throw Error("only single-head attention is implemented");
    if (max_epochs < 0 || patience < 0) throw Error("negative training budget");
  }
};

/// Flat parameter list for one layer. Slot meaning per backbone:
///   gcn: [W, b] ; gat: [W, a, b] ; gin: [W1, b1, W2, b2]
using LayerParams = std::vector<Mat>;

struct EpochStat {
  Scalar loss = 0;
  Scalar val_illicit_f1 = 0;
};

/// Optional per-column affine feature transform baked into a trained model
/// (fitted on training rows only).
struct FeatureTransform {
  Vec mean;
  Vec std;  // zero entries mark constant columns (output 0)

  Mat apply(const Mat& X) const {
    if (X.cols() != mean.size()) throw ShapeMismatch("feature transform width mismatch");
    Mat out(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
      if (std[j] == 0.0) {
        out.col(j).setZero();
      } else {
        out.col(j) = (X.col(j).array() - mean[j]) / std[j];
      }
    }
    return out;
  }
};

struct TrainedModel {
  ModelConfig config;
  std::vector<LayerParams> params;
  std::vector<EpochStat> train_trace;
  int best_epoch = 0;
  std::optional<FeatureTransform> feature_transform;
};

namespace detail {

inline Mat init_uniform(Index rows, Index cols, Index fan_in, RandomSource& rng) {
  const Scalar limit = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
  return m;
}

}  // namespace detail

/// Fan-in-scaled uniform initialization of every layer, drawn in a fixed
/// order from the provided randomness source.
inline std::vector<LayerParams> init_params(const ModelConfig& cfg,
                                            RandomSource& rng) {
  cfg.validate();
  std::vector<LayerParams> params;
  for (std::size_t l = 0; l + 1 < cfg.layer_dims.size(); ++l) {
    const Index din = cfg.layer_dims[l], dout = cfg.layer_dims[l + 1];
    LayerParams p;
    switch (cfg.backbone) {
      case Backbone::Gcn:
        p.push_back(detail::init_uniform(din, dout, din, rng));
        p.push_back(Mat::Zero(1, dout));
        break;
      case Backbone::Gat:
        p.push_back(detail::init_uniform(din, dout, din, rng));
        p.push_back(detail::init_uniform(2 * dout, 1, dout, rng));
        p.push_back(Mat::Zero(1, dout));
        break;
      case Backbone::Gin:
        p.push_back(detail::init_uniform(din, dout, din, rng));
        p.push_back(Mat::Zero(1, dout));
        p.push_back(detail::init_uniform(dout, dout, dout, rng));
        p.push_back(Mat::Zero(1, dout));
        break;
    }
    params.push_back(std::move(p));
  }
  return params;
}

struct LayerCache {
  GcnCache gcn;
  GatCache gat;
  GinCache gin;
};

/// Hidden layers use the configured activation; the final layer emits raw
/// logits (GIN's nonlinearity lives inside its MLP).
inline Mat model_forward(const Topology& topo, const Mat& X,
                         const ModelConfig& cfg,
                         const std::vector<LayerParams>& params,
                         std::vector<LayerCache>* caches = nullptr) {
  if (X.cols() != cfg.layer_dims.front())
    throw ShapeMismatch("feature width != first layer width");
  if (caches) caches->resize(params.size());
  Mat H = X;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const bool last = (l + 1 == params.size());
    const ActKind act = last ? ActKind::None : cfg.activation;
    const LayerParams& p = params[l];
    switch (cfg.backbone) {
      case Backbone::Gcn:
        H = gcn_forward(topo, H, p[0], p[1].row(0), act,
                        caches ? &(*caches)[l].gcn : nullptr);
        break;
      case Backbone::Gat:
        H = gat_forward(topo, H, p[0], p[1].col(0), p[2].row(0), act,
                        caches ? &(*caches)[l].gat : nullptr);
        break;
      case Backbone::Gin:
        H = gin_forward(topo, H, {p[0], p[1].row(0), p[2], p[3].row(0)},
                        cfg.gin_epsilon, cfg.activation,
                        caches ? &(*caches)[l].gin : nullptr);
        break;
    }
  }
  return H;
}

/// Reverse pass over the recorded forward; returns per-layer parameter
/// gradients shaped like params. GCN/GAT need the layer inputs, which the
/// caches hold implicitly (gcn caches agg; gat caches H).
inline std::vector<LayerParams> model_backward(const Topology& topo,
                                               const ModelConfig& cfg,
                                               const std::vector<LayerParams>& params,
                                               std::vector<LayerCache>& caches,
                                               const Mat& dlogits) {
  std::vector<LayerParams> grads(params.size());
  Mat G = dlogits;
  for (std::size_t li = params.size(); li-- > 0;) {
    const bool last = (li + 1 == params.size());
    const ActKind act = last ? ActKind::None : cfg.activation;
    const LayerParams& p = params[li];
    switch (cfg.backbone) {
      case Backbone::Gcn: {
        GcnGrads g = gcn_backward(topo, caches[li].gcn, p[0], act, G);
        grads[li] = {std::move(g.dW), std::move(g.db)};
        G = std::move(g.dH);
        break;
      }
      case Backbone::Gat: {
        GatGrads g = gat_backward(topo, caches[li].gat, p[0], p[1].col(0), act, G);
        grads[li] = {std::move(g.dW), std::move(g.da), std::move(g.db)};
        G = std::move(g.dH);
        break;
      }
      case Backbone::Gin: {
        GinGrads g = gin_backward(topo, caches[li].gin,
                                  {p[0], p[1].row(0), p[2], p[3].row(0)},
                                  cfg.gin_epsilon, cfg.activation, G);
        grads[li] = {std::move(g.dW1), std::move(g.db1), std::move(g.dW2),
                     std::move(g.db2)};
        G = std::move(g.dH);
        break;
      }
    }
  }
  return grads;
}

/// Adaptive-moments gradient descent state over a parameter list.
class AdamOptimizer {
 public:
  AdamOptimizer(Scalar lr, Scalar beta1 = 0.9, Scalar beta2 = 0.999,
                Scalar eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<LayerParams>& params,
            const std::vector<LayerParams>& grads) {
    if (m_.empty()) {
      m_ = zeros_like(params);
      v_ = zeros_like(params);
    }
    ++t_;
    const Scalar bc1 = 1.0 - std::pow(beta1_, t_);
    const Scalar bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t l = 0; l < params.size(); ++l) {
      for (std::size_t k = 0; k < params[l].size(); ++k) {
        Mat& m = m_[l][k];
        Mat& v = v_[l][k];
        const Mat& g = grads[l][k];
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        params[l][k].array() -=
            lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
      }
    }
  }

 private:
  static std::vector<LayerParams> zeros_like(const std::vector<LayerParams>& p) {
    std::vector<LayerParams> z(p.size());
    for (std::size_t l = 0; l < p.size(); ++l)
      for (const Mat& m : p[l]) z[l].push_back(Mat::Zero(m.rows(), m.cols()));
    return z;
  }

  Scalar lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<LayerParams> m_, v_;
};

/// Softmax class probabilities for every node (columns: licit, illicit).
inline Mat predict_proba(const TrainedModel& model, const Topology& topo,
                         const Mat& X) {
  if (model.feature_transform) {
    return softmax_rows(model_forward(topo, model.feature_transform->apply(X),
                                      model.config, model.params));
  }
  return softmax_rows(model_forward(topo, X, model.config, model.params));
}

inline Mat predict_proba(const TrainedModel& model, const TransactionGraph& g) {
  return predict_proba(model, Topology::from_graph(g), g.features());
}

namespace detail {

inline Scalar validation_illicit_f1(const Mat& proba,
                                    const std::vector<Label>& labels,
                                    const std::vector<Part>& parts) {
  std::vector<Scalar> scores;
  std::vector<int> truth;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] != Part::Val) continue;
    scores.push_back(proba(static_cast<Index>(i), 1));
    truth.push_back(labels[i] == Label::Illicit ? 1 : 0);
  }
  const auto c = metrics::confusion(scores, truth, 0.5);
  return metrics::prf_fpr(c).f1;
}

}  // namespace detail

/// Full-batch transductive training with class-weighted cross-entropy on the
/// train mask and early stopping on validation illicit F1. Deterministic
/// given (config, data, rng seed); returns the parameters of the best epoch.
inline TrainedModel train(const TransactionGraph& graph, const Mat& X,
                          const SplitAssignment& split, const ModelConfig& cfg,
                          RandomSource* rng_in = nullptr) {
  cfg.validate();
  if (split.assignment.size() != static_cast<std::size_t>(graph.node_count()))
    throw LengthMismatch("split does not cover the graph");

  RandomSource local = RandomSource::seeded(cfg.seed);
  RandomSource& rng = rng_in ? *rng_in : local;

  const Topology topo = Topology::from_graph(graph);
  TrainedModel model;
  model.config = cfg;
  model.params = init_params(cfg, rng);

  const auto& labels = graph.labels();
  std::vector<std::uint8_t> train_mask(labels.size(), 0), val_mask(labels.size(), 0);
  bool has_train = false, has_val = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (split.assignment[i] == Part::Train) {
      train_mask[i] = 1;
      has_train = true;
    }
    if (split.assignment[i] == Part::Val) {
      val_mask[i] = 1;
      has_val = true;
    }
  }
  if (!has_train || !has_val)
    throw EmptyMask("training needs labeled train and val nodes");

  const ClassWeights cw = class_weights(labels, split.assignment);
  AdamOptimizer opt(cfg.learning_rate);

  std::vector<LayerParams> best_params = model.params;
  Scalar best_f1 = -1.0;
  Scalar best_val_loss = std::numeric_limits<Scalar>::infinity();
  int since_best = 0;

  std::vector<LayerCache> caches;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const Mat logits = model_forward(topo, X, cfg, model.params, &caches);
    LossResult loss = weighted_cross_entropy(logits, labels, cw, train_mask);
    const auto grads = model_backward(topo, cfg, model.params, caches, loss.dlogits);
    opt.step(model.params, grads);

    const Mat val_logits = model_forward(topo, X, cfg, model.params);
    const Scalar f1 = detail::validation_illicit_f1(softmax_rows(val_logits),
                                                    labels, split.assignment);
    const Scalar val_loss =
        weighted_cross_entropy(val_logits, labels, cw, val_mask).loss;
    model.train_trace.push_back({loss.loss, f1});

    // F1 drives early stopping; val loss breaks F1 ties so a flat-F1 phase
    // (common with a handful of validation positives) cannot hand back the
    // initialization as the "best" epoch
    if (f1 > best_f1 || (f1 == best_f1 && val_loss < best_val_loss)) {
      best_f1 = f1;
      best_val_loss = val_loss;
      best_params = model.params;
      model.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.params = std::move(best_params);
  return model;
}

}  // namespace amlkit::nn
