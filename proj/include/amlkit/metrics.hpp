#pragma once

#include "amlkit/types.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace amlkit::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

/// Thresholded confusion counts: predicted illicit iff score >= threshold.
inline ConfusionCounts confusion(std::span<const Scalar> scores,
                                 std::span<const int> labels, Scalar threshold) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool pos = labels[i] != 0;
    if (pred && pos) ++c.tp;
    else if (pred && !pos) ++c.fp;
    else if (!pred && pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct PrfFpr {
  Scalar precision = 0, recall = 0, f1 = 0, fpr = 0;
  bool precision_defined = true, recall_defined = true, fpr_defined = true;
};

/// Precision/recall/F1/FPR with 0-valued, flagged 0/0 conventions.
inline PrfFpr prf_fpr(const ConfusionCounts& c) {
  PrfFpr m;
  if (c.tp + c.fp == 0) {
    m.precision_defined = false;
  } else {
    m.precision = static_cast<Scalar>(c.tp) / static_cast<Scalar>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_defined = false;
  } else {
    m.recall = static_cast<Scalar>(c.tp) / static_cast<Scalar>(c.tp + c.fn);
  }
  if (m.precision + m.recall > 0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  if (c.fp + c.tn == 0) {
    m.fpr_defined = false;
  } else {
    m.fpr = static_cast<Scalar>(c.fp) / static_cast<Scalar>(c.fp + c.tn);
  }
  return m;
}

namespace detail {
inline std::vector<std::size_t> order_by_score_desc(std::span<const Scalar> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}
}  // namespace detail

/// Average precision: AP = sum_k (R_k - R_{k-1}) * P_k over descending unique
/// score thresholds.
inline Scalar pr_auc(std::span<const Scalar> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  std::int64_t positives = 0;
  for (int l : labels) positives += (l != 0);
  if (positives == 0) throw NoPositives("pr_auc needs at least one positive label");

  const auto idx = detail::order_by_score_desc(scores);
  Scalar ap = 0, prev_recall = 0;
  std::int64_t tp = 0, seen = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    tp += (labels[idx[k]] != 0);
    ++seen;
    const bool boundary =
        k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]];
    if (!boundary) continue;
    const Scalar recall = static_cast<Scalar>(tp) / static_cast<Scalar>(positives);
    const Scalar precision = static_cast<Scalar>(tp) / static_cast<Scalar>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

/// ROC-AUC as the Mann-Whitney statistic P(s_pos > s_neg) + 0.5 P(tie),
/// computed from tie-averaged ranks.
inline Scalar roc_auc(std::span<const Scalar> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  std::int64_t pos = 0, neg = 0;
  for (int l : labels) (l != 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw SingleClass("roc_auc needs both classes");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  Scalar pos_rank_sum = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const Scalar avg_rank = static_cast<Scalar>(i + j) / 2.0 + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k)
      if (labels[idx[k]] != 0) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const Scalar p = static_cast<Scalar>(pos);
  return (pos_rank_sum - p * (p + 1) / 2.0) / (p * static_cast<Scalar>(neg));
}

struct CurvePoint {
  Scalar threshold = 0;
  Scalar x = 0;
  Scalar y = 0;
};

/// Recall within the top-k nodes ranked by descending score (stable by index
/// on ties): point k = (k/n, recall@k, threshold = k-th score).
inline std::vector<CurvePoint> recall_vs_reviewed(std::span<const Scalar> scores,
                                                  std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  std::int64_t positives = 0;
  for (int l : labels) positives += (l != 0);
  if (positives == 0)
    throw NoPositives("recall_vs_reviewed needs at least one positive label");

  const auto idx = detail::order_by_score_desc(scores);
  std::vector<CurvePoint> curve;
  curve.reserve(idx.size());
  std::int64_t tp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    tp += (labels[idx[k]] != 0);
    curve.push_back({scores[idx[k]],
                     static_cast<Scalar>(k + 1) / static_cast<Scalar>(idx.size()),
                     static_cast<Scalar>(tp) / static_cast<Scalar>(positives)});
  }
  return curve;
}

/// PR curve points over descending unique thresholds (x = recall,
/// y = precision).
inline std::vector<CurvePoint> pr_curve(std::span<const Scalar> scores,
                                        std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  std::int64_t positives = 0;
  for (int l : labels) positives += (l != 0);
  if (positives == 0) throw NoPositives("pr_curve needs at least one positive label");

  const auto idx = detail::order_by_score_desc(scores);
  std::vector<CurvePoint> curve;
  std::int64_t tp = 0, seen = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    tp += (labels[idx[k]] != 0);
    ++seen;
    if (k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]]) {
      curve.push_back({scores[idx[k]],
                       static_cast<Scalar>(tp) / static_cast<Scalar>(positives),
                       static_cast<Scalar>(tp) / static_cast<Scalar>(seen)});
    }
  }
  return curve;
}

/// ROC curve points over descending unique thresholds (x = FPR, y = TPR).
inline std::vector<CurvePoint> roc_curve(std::span<const Scalar> scores,
                                         std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw LengthMismatch("scores and labels differ in length");
  std::int64_t pos = 0, neg = 0;
  for (int l : labels) (l != 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw SingleClass("roc_curve needs both classes");

  const auto idx = detail::order_by_score_desc(scores);
  std::vector<CurvePoint> curve;
  std::int64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (labels[idx[k]] != 0 ? tp : fp) += 1;
    if (k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]]) {
      curve.push_back({scores[idx[k]],
                       static_cast<Scalar>(fp) / static_cast<Scalar>(neg),
                       static_cast<Scalar>(tp) / static_cast<Scalar>(pos)});
    }
  }
  return curve;
}

}  // namespace amlkit::metrics
