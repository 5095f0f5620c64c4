#pragma once

#include "amlkit/metrics.hpp"
#include "amlkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace amlkit::ensemble {

struct GridPointRecord {
  std::vector<Scalar> w;
  Scalar recall = 0;
  Scalar fpr = 0;
  Scalar f1 = 0;
  bool feasible = false;
};

struct TuningRecord {
  Scalar grid_step = 0;
  Scalar objective = 0;          // recall of the chosen point (or F1 on fallback)
  bool fallback_f1 = false;      // no grid point met the FPR cap
  std::string constraint_status; // "feasible" or "infeasible_fpr_cap"
  std::vector<GridPointRecord> grid;
};

/// Simplex weight vector over the base models plus the tuning audit trail.
struct EnsembleWeights {
  std::vector<Scalar> w;
  TuningRecord tuning;
};

inline void check_weights(const std::vector<Scalar>& w, std::size_t k) {
  if (w.size() != k) throw InvalidWeights("weight count != model count");
  Scalar sum = 0;
  for (Scalar wi : w) {
    if (!(wi >= 0.0)) throw InvalidWeights("weights must be non-negative");
    sum += wi;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidWeights("weights must sum to 1");
}

/// Weighted probability fusion P = sum_i w_i P_i. Rows stay probability
/// vectors because the weights live on the simplex.
inline Mat soft_vote(const std::vector<Mat>& probas, const std::vector<Scalar>& w) {
  if (probas.empty()) throw InvalidWeights("no base models");
  check_weights(w, probas.size());
  for (const Mat& p : probas)
    if (p.rows() != probas[0].rows() || p.cols() != probas[0].cols())
      throw ShapeMismatch("base probability shapes differ");
  Mat out = Mat::Zero(probas[0].rows(), probas[0].cols());
  for (std::size_t i = 0; i < probas.size(); ++i) out += w[i] * probas[i];
  return out;
}

namespace detail {

inline void enumerate_simplex(int k, int units,
                              std::vector<int>& counts,
                              const std::function<void(const std::vector<int>&)>& fn,
                              int slot = 0, int left = -1) {
  if (left < 0) left = units;
  if (slot == k - 1) {
    counts[slot] = left;
    fn(counts);
    return;
  }
  for (int c = 0; c <= left; ++c) {
    counts[slot] = c;
    enumerate_simplex(k, units, counts, fn, slot + 1, left - c);
  }
}

inline Scalar uniformity_penalty(const std::vector<Scalar>& w) {
  const Scalar u = 1.0 / static_cast<Scalar>(w.size());
  Scalar s = 0;
  for (Scalar wi : w) s += (wi - u) * (wi - u);
  return s;
}

}  // namespace detail

/// Exhaustive simplex grid search for soft-voting weights: maximize illicit
/// recall at threshold 0.5 subject to FPR <= fpr_cap on the validation
/// nodes; if no grid point is feasible, fall back to maximizing illicit F1.
/// Ties break toward the most uniform weights, then lexicographically.
inline EnsembleWeights tune_weights(const std::vector<Mat>& val_probas,
                                    std::span<const int> val_labels,
                                    Scalar fpr_cap = 0.01,
                                    Scalar grid_step = 0.05) {
  if (val_probas.empty()) throw InvalidWeights("no base models");
  if (!(grid_step > 0.0) || grid_step > 0.5)
    throw InvalidWeights("grid step must be in (0, 0.5]");
  const Index n = val_probas[0].rows();
  if (static_cast<Index>(val_labels.size()) != n)
    throw ShapeMismatch("labels do not align with validation probabilities");
  bool has_pos = false, has_neg = false;
  for (int l : val_labels) (l != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DegenerateValidation("validation labels contain a single class");

  const int k = static_cast<int>(val_probas.size());
  const int units = std::max(1, static_cast<int>(std::llround(1.0 / grid_step)));

  EnsembleWeights best;
  best.tuning.grid_step = 1.0 / static_cast<Scalar>(units);

  struct Candidate {
    std::vector<Scalar> w;
    Scalar recall, fpr, f1;
    bool feasible;
  };
  std::vector<Candidate> candidates;

  std::vector<int> counts(k);
  std::vector<Scalar> scores(n);
  detail::enumerate_simplex(k, units, counts, [&](const std::vector<int>& c) {
    std::vector<Scalar> w(k);
    for (int i = 0; i < k; ++i) w[i] = static_cast<Scalar>(c[i]) / units;
    for (Index r = 0; r < n; ++r) {
      Scalar s = 0;
      for (int i = 0; i < k; ++i) s += w[i] * val_probas[i](r, 1);
      scores[r] = s;
    }
    const auto conf = metrics::confusion(scores, val_labels, 0.5);
    const auto m = metrics::prf_fpr(conf);
    const bool feasible = m.fpr <= fpr_cap;
    candidates.push_back({std::move(w), m.recall, m.fpr, m.f1, feasible});
  });

  bool any_feasible = false;
  for (const auto& c : candidates) any_feasible |= c.feasible;

  const Candidate* chosen = nullptr;
  for (const auto& c : candidates) {
    if (any_feasible && !c.feasible) continue;
    const Scalar obj = any_feasible ? c.recall : c.f1;
    if (!chosen) {
      chosen = &c;
      continue;
    }
    const Scalar best_obj = any_feasible ? chosen->recall : chosen->f1;
    if (obj > best_obj) {
      chosen = &c;
    } else if (obj == best_obj) {
      const Scalar pc = detail::uniformity_penalty(c.w);
      const Scalar pb = detail::uniformity_penalty(chosen->w);
      if (pc < pb || (pc == pb && c.w < chosen->w)) chosen = &c;
    }
  }

  best.w = chosen->w;
  best.tuning.fallback_f1 = !any_feasible;
  best.tuning.constraint_status = any_feasible ? "feasible" : "infeasible_fpr_cap";
  best.tuning.objective = any_feasible ? chosen->recall : chosen->f1;
  best.tuning.grid.reserve(candidates.size());
  for (const auto& c : candidates)
    best.tuning.grid.push_back({c.w, c.recall, c.fpr, c.f1, c.feasible});
  return best;
}

// ---------------------------------------------------------------------------
// Stacking meta-classifier: logistic model over the 2k base-class
// probabilities (centered at 0.5) plus a bias.
// ---------------------------------------------------------------------------

struct StackingModel {
  Vec coefficients;  // 2k feature weights followed by the bias
  std::vector<std::pair<int, Scalar>> training_trace;  // (iteration, loss)
  int iterations = 0;
  Scalar final_grad_norm = 0;

  int base_model_count() const {
    return static_cast<int>((coefficients.size() - 1) / 2);
  }
};

namespace detail {

inline Mat stack_features(const std::vector<Mat>& probas) {
  const Index n = probas[0].rows();
  Mat X(n, static_cast<Index>(2 * probas.size()));
  for (std::size_t m = 0; m < probas.size(); ++m) {
    if (probas[m].rows() != n || probas[m].cols() != 2)
      throw ShapeMismatch("base probability shapes differ");
    X.col(2 * m) = probas[m].col(0).array() - 0.5;
    X.col(2 * m + 1) = probas[m].col(1).array() - 0.5;
  }
  return X;
}

inline Scalar sigmoid(Scalar z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace detail

/// Full-batch gradient descent on the mean logistic loss from zero init,
/// run until the gradient norm drops below 1e-6 or 10^4 iterations.
inline StackingModel fit_stacker(const std::vector<Mat>& val_probas,
                                 std::span<const int> val_labels) {
  if (val_probas.empty()) throw InvalidWeights("no base models");
  const Mat X = detail::stack_features(val_probas);
  const Index n = X.rows(), d = X.cols();
  if (static_cast<Index>(val_labels.size()) != n)
    throw ShapeMismatch("labels do not align with validation probabilities");
  bool has_pos = false, has_neg = false;
  for (int l : val_labels) (l != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DegenerateValidation("validation labels contain a single class");

  Vec y(n);
  for (Index i = 0; i < n; ++i) y[i] = val_labels[i] != 0 ? 1.0 : 0.0;

  StackingModel model;
  model.coefficients = Vec::Zero(d + 1);
  const Scalar lr = 1.0;
  const int max_iters = 10000;
  const Scalar tol = 1e-6;

  Vec grad(d + 1);
  for (int it = 1; it <= max_iters; ++it) {
    Vec z = X * model.coefficients.head(d);
    z.array() += model.coefficients[d];
    Vec p(n);
    Scalar loss = 0;
    for (Index i = 0; i < n; ++i) {
      p[i] = detail::sigmoid(z[i]);
      // -y log p - (1-y) log(1-p), in the numerically stable log1p form
      loss += z[i] > 0 ? (1.0 - y[i]) * z[i] + std::log1p(std::exp(-z[i]))
                       : -y[i] * z[i] + std::log1p(std::exp(z[i]));
    }
    loss /= static_cast<Scalar>(n);
    const Vec resid = (p - y) / static_cast<Scalar>(n);
    grad.head(d) = X.transpose() * resid;
    grad[d] = resid.sum();

    model.iterations = it;
    model.final_grad_norm = grad.norm();
    if (it == 1 || it % 100 == 0) model.training_trace.emplace_back(it, loss);
    if (model.final_grad_norm < tol) break;
    model.coefficients -= lr * grad;
  }
  return model;
}

/// Sigmoid of the linear score per node; rows are [licit, illicit] pairs.
inline Mat stack_predict(const StackingModel& model, const std::vector<Mat>& probas) {
  const Mat X = detail::stack_features(probas);
  if (X.cols() + 1 != model.coefficients.size())
    throw ShapeMismatch("base model count differs from fit");
  Mat out(X.rows(), 2);
  for (Index i = 0; i < X.rows(); ++i) {
    const Scalar z =
        X.row(i).dot(model.coefficients.head(X.cols())) + model.coefficients[X.cols()];
    const Scalar p = detail::sigmoid(z);
    out(i, 0) = 1.0 - p;
    out(i, 1) = p;
  }
  return out;
}

}  // namespace amlkit::ensemble
