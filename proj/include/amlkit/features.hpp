#pragma once

#include "amlkit/graph.hpp"
#include "amlkit/types.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace amlkit {

enum class ColumnProvenance : std::uint8_t { Raw = 0, ZScored = 1, Derived = 2 };

/// Dense node-feature matrix with per-column fit statistics and a provenance
/// tag per column. All entries are finite by construction.
struct FeatureMatrix {
  Mat values;
  std::vector<std::pair<Scalar, Scalar>> column_stats;  // (mean, population std)
  std::vector<ColumnProvenance> provenance;

  static FeatureMatrix raw(Mat m) {
    FeatureMatrix f;
    f.column_stats.assign(m.cols(), {0.0, 0.0});
    f.provenance.assign(m.cols(), ColumnProvenance::Raw);
    f.values = std::move(m);
    return f;
  }
};

/// Transaction-level attributes: input/output counts, fee, size in bytes and
/// the individual output values.
struct TxAttributes {
  std::int64_t v_in = 0;
  std::int64_t v_out = 0;
  Scalar fee = 0.0;
  Scalar size = 0.0;
  std::vector<Scalar> outputs;
};

inline void check_attrs(const TxAttributes& a) {
  if (a.v_out != static_cast<std::int64_t>(a.outputs.size()))
    throw DimensionMismatch("v_out does not match the number of output values");
  if (a.v_in < 0 || a.v_out < 0) throw Error("negative input/output count");
}

inline Scalar out_value(const TxAttributes& a) {
  Scalar s = 0.0;
  for (Scalar o : a.outputs) s += o;
  return s;
}

/// Total input value. Inputs fund outputs plus the fee.
inline Scalar in_value(const TxAttributes& a) { return out_value(a) + a.fee; }

/// Z-scores every column using mean and population std computed on fit_rows
/// only, then applies the transform to all rows. Zero-variance columns map
/// to 0.
inline FeatureMatrix zscore_normalize(const FeatureMatrix& in,
                                      const std::vector<Index>& fit_rows) {
  if (fit_rows.empty()) throw EmptyFitSet("z-score fit set is empty");
  const Index d = in.values.cols();
  const double m = static_cast<double>(fit_rows.size());

  FeatureMatrix out;
  out.values.resizeLike(in.values);
  out.column_stats.resize(d);
  out.provenance.assign(d, ColumnProvenance::ZScored);
  for (Index j = 0; j < d; ++j) {
    double mean = 0.0;
    for (Index r : fit_rows) mean += in.values(r, j);
    mean /= m;
    double var = 0.0;
    for (Index r : fit_rows) {
      const double dlt = in.values(r, j) - mean;
      var += dlt * dlt;
    }
    const double sd = std::sqrt(var / m);
    out.column_stats[j] = {mean, sd};
    if (sd == 0.0) {
      out.values.col(j).setZero();
    } else {
      out.values.col(j) = (in.values.col(j).array() - mean) / sd;
    }
  }
  return out;
}

/// Population variance of the output values. v_out = 0 yields the sentinel 0
/// with *no_outputs set.
inline Scalar output_dispersion(const TxAttributes& attrs,
                                bool* no_outputs = nullptr) {
  check_attrs(attrs);
  if (no_outputs) *no_outputs = attrs.outputs.empty();
  if (attrs.outputs.empty()) return 0.0;
  const double n = static_cast<double>(attrs.outputs.size());
  double mean = 0.0;
  for (Scalar o : attrs.outputs) mean += o;
  mean /= n;
  double var = 0.0;
  for (Scalar o : attrs.outputs) var += (o - mean) * (o - mean);
  return var / n;
}

/// Mean total input value over the one-hop neighborhood (in- and
/// out-neighbors). Empty neighborhood yields 0 with *empty set.
inline Scalar neighborhood_avg_in(const TransactionGraph& g, Index node,
                                  std::span<const TxAttributes> attrs,
                                  bool* empty = nullptr) {
  const auto nbrs = g.neighbors(node);
  if (empty) *empty = nbrs.empty();
  if (nbrs.empty()) return 0.0;
  double sum = 0.0;
  for (Index u : nbrs) sum += in_value(attrs[u]);
  return sum / static_cast<double>(nbrs.size());
}

/// Population variance of total output values over the one-hop neighborhood.
inline Scalar neighborhood_var_out(const TransactionGraph& g, Index node,
                                   std::span<const TxAttributes> attrs,
                                   bool* empty = nullptr) {
  const auto nbrs = g.neighbors(node);
  if (empty) *empty = nbrs.empty();
  if (nbrs.empty()) return 0.0;
  const double n = static_cast<double>(nbrs.size());
  double mean = 0.0;
  for (Index u : nbrs) mean += out_value(attrs[u]);
  mean /= n;
  double var = 0.0;
  for (Index u : nbrs) {
    const double d = out_value(attrs[u]) - mean;
    var += d * d;
  }
  return var / n;
}

struct AssembleOptions {
  bool tx_block = false;       // z-scored (v_in, v_out, fee, size)
  bool derived_block = false;  // dispersion, avg-in, var-out
  bool raw_block = true;       // ingested features passthrough
  Index target_dim = 0;        // 0 = natural width, else zero-pad / truncate
  const std::vector<Index>* zscore_fit_rows = nullptr;  // null = all rows
};

/// Concatenates the configured blocks into one feature matrix:
/// [z-scored tx attributes | derived aggregates | raw ingested columns],
/// padded or truncated to target_dim when set.
inline FeatureMatrix assemble_features(const TransactionGraph& g,
                                       std::span<const TxAttributes> attrs,
                                       const AssembleOptions& opt = {}) {
  const Index n = g.node_count();
  if ((opt.tx_block || opt.derived_block) &&
      static_cast<Index>(attrs.size()) != n)
    throw DimensionMismatch("attributes must cover every node");

  Index width = 0;
  if (opt.tx_block) width += 4;
  if (opt.derived_block) width += 3;
  if (opt.raw_block) width += g.features().cols();
  if (width == 0) throw DimensionMismatch("no feature blocks selected");

  FeatureMatrix out;
  out.values.resize(n, width);
  out.column_stats.assign(width, {0.0, 0.0});
  out.provenance.assign(width, ColumnProvenance::Raw);

  Index col = 0;
  if (opt.tx_block) {
    FeatureMatrix tx;
    tx.values.resize(n, 4);
    for (Index i = 0; i < n; ++i) {
      check_attrs(attrs[i]);
      tx.values.row(i) << static_cast<Scalar>(attrs[i].v_in),
          static_cast<Scalar>(attrs[i].v_out), attrs[i].fee, attrs[i].size;
    }
    std::vector<Index> all_rows;
    if (!opt.zscore_fit_rows) {
      all_rows.resize(n);
      std::iota(all_rows.begin(), all_rows.end(), Index{0});
    }
    const FeatureMatrix scored =
        zscore_normalize(tx, opt.zscore_fit_rows ? *opt.zscore_fit_rows : all_rows);
    out.values.middleCols(col, 4) = scored.values;
    for (Index j = 0; j < 4; ++j) {
      out.column_stats[col + j] = scored.column_stats[j];
      out.provenance[col + j] = ColumnProvenance::ZScored;
    }
    col += 4;
  }
  if (opt.derived_block) {
    for (Index i = 0; i < n; ++i) {
      out.values(i, col) = output_dispersion(attrs[i]);
      out.values(i, col + 1) = neighborhood_avg_in(g, i, attrs);
      out.values(i, col + 2) = neighborhood_var_out(g, i, attrs);
    }
    for (Index j = 0; j < 3; ++j) out.provenance[col + j] = ColumnProvenance::Derived;
    col += 3;
  }
  if (opt.raw_block) {
    out.values.middleCols(col, g.features().cols()) = g.features();
    col += g.features().cols();
  }

  if (opt.target_dim > 0 && opt.target_dim != width) {
    Mat resized = Mat::Zero(n, opt.target_dim);
    const Index keep = std::min(width, opt.target_dim);
    resized.leftCols(keep) = out.values.leftCols(keep);
    out.values = std::move(resized);
    out.column_stats.resize(opt.target_dim, {0.0, 0.0});
    out.provenance.resize(opt.target_dim, ColumnProvenance::Raw);
  }
  return out;
}

}  // namespace amlkit
