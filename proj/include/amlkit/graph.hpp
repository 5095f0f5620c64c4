#pragma once

#include "amlkit/quantum/random_source.hpp"
#include "amlkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace amlkit {

/// One raw transaction row: opaque identifier, discrete time step in [1, T],
/// and the ingested feature vector.
struct TransactionRecord {
  std::string external_id;
  int time_step = 0;
  RowVec raw_features;
};

struct RawEdge {
  std::string src;
  std::string dst;
};

struct IntegrityReport {
  std::int64_t duplicates_removed = 0;
  std::int64_t dangling_edges_removed = 0;
  std::int64_t causality_edges_removed = 0;
  std::array<std::int64_t, kNumLabelClasses> label_histogram{0, 0, 0};
};

/// Temporal directed transaction graph. Nodes carry features, labels and time
/// steps; edges are stored as a CSR out-adjacency. Every stored edge (i, j)
/// satisfies time_steps[i] < time_steps[j]. Immutable once built.
class TransactionGraph {
 public:
  Index node_count() const { return static_cast<Index>(time_steps_.size()); }
  Index edge_count() const { return static_cast<Index>(out_targets_.size()); }

  const Mat& features() const { return features_; }
  Mat& mutable_features() { return features_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<int>& time_steps() const { return time_steps_; }

  std::span<const Index> out_neighbors(Index i) const {
    return {out_targets_.data() + out_offsets_[i],
            out_targets_.data() + out_offsets_[i + 1]};
  }
  /// Union of in- and out-neighbors, deduplicated, self excluded, ascending.
  std::span<const Index> neighbors(Index i) const {
    return {und_targets_.data() + und_offsets_[i],
            und_targets_.data() + und_offsets_[i + 1]};
  }
  Index in_degree(Index i) const { return in_degrees_[i]; }
  Index out_degree(Index i) const { return out_offsets_[i + 1] - out_offsets_[i]; }
  Index total_degree(Index i) const { return in_degree(i) + out_degree(i); }

  const std::vector<std::string>& index_to_id() const { return index_to_id_; }
  const std::string& external_id(Index i) const { return index_to_id_[i]; }
  Index index_of(const std::string& external_id) const {
    auto it = id_to_index_.find(external_id);
    return it == id_to_index_.end() ? Index{-1} : it->second;
  }

  const std::vector<Index>& out_offsets() const { return out_offsets_; }
  const std::vector<Index>& out_targets() const { return out_targets_; }

  /// Rebuilds the derived adjacency state after direct field assembly
  /// (deserialization path). Edges are assumed already causal.
  static TransactionGraph assemble(Mat features, std::vector<Label> labels,
                                   std::vector<int> time_steps,
                                   std::vector<Index> out_offsets,
                                   std::vector<Index> out_targets,
                                   std::vector<std::string> ids);

 private:
  friend std::pair<TransactionGraph, IntegrityReport> build_graph(
      const std::vector<TransactionRecord>&, const std::vector<RawEdge>&,
      const std::unordered_map<std::string, Label>&);

  void finish_adjacency();

  Mat features_;
  std::vector<Label> labels_;
  std::vector<int> time_steps_;
  std::vector<Index> out_offsets_, out_targets_;
  std::vector<Index> und_offsets_, und_targets_;
  std::vector<Index> in_degrees_;
  std::vector<std::string> index_to_id_;
  std::unordered_map<std::string, Index> id_to_index_;
};

/// Keeps the first occurrence of each external_id, preserving input order.
/// Returns the survivors and the number of dropped duplicates.
inline std::pair<std::vector<TransactionRecord>, std::int64_t> dedupe_nodes(
    const std::vector<TransactionRecord>& records) {
  std::vector<TransactionRecord> out;
  out.reserve(records.size());
  std::unordered_set<std::string> seen;
  seen.reserve(records.size() * 2);
  std::int64_t dropped = 0;
  for (const auto& r : records) {
    if (seen.insert(r.external_id).second) {
      out.push_back(r);
    } else {
      ++dropped;
    }
  }
  return {std::move(out), dropped};
}

/// Drops edges with an endpoint outside valid_ids, preserving input order.
inline std::pair<std::vector<RawEdge>, std::int64_t> validate_edges(
    const std::vector<RawEdge>& edges,
    const std::unordered_set<std::string>& valid_ids) {
  std::vector<RawEdge> out;
  out.reserve(edges.size());
  std::int64_t dropped = 0;
  for (const auto& e : edges) {
    if (valid_ids.contains(e.src) && valid_ids.contains(e.dst)) {
      out.push_back(e);
    } else {
      ++dropped;
    }
  }
  return {std::move(out), dropped};
}

/// Raw label string -> class mapping. Defaults to the Elliptic convention;
/// anything outside the table maps to unknown.
struct LabelMapping {
  std::unordered_map<std::string, Label> table{{"1", Label::Illicit},
                                               {"2", Label::Licit}};
  Label map(const std::string& raw) const {
    auto it = table.find(raw);
    return it == table.end() ? Label::Unknown : it->second;
  }
};

/// Normalizes raw (id, label) rows into the three-class scheme. An id seen
/// with two distinct non-unknown classes raises ConflictingLabel; ids absent
/// from the rows are simply absent from the result (callers default them to
/// unknown).
inline std::unordered_map<std::string, Label> normalize_labels(
    const std::vector<std::pair<std::string, std::string>>& raw_labels,
    const LabelMapping& mapping = {}) {
  std::unordered_map<std::string, Label> out;
  out.reserve(raw_labels.size() * 2);
  for (const auto& [id, raw] : raw_labels) {
    const Label l = mapping.map(raw);
    auto [it, inserted] = out.emplace(id, l);
    if (inserted) continue;
    if (l == Label::Unknown || l == it->second) continue;
    if (it->second == Label::Unknown) {
      it->second = l;
    } else {
      throw ConflictingLabel("id '" + id + "' labeled both " +
                             label_name(it->second) + " and " + label_name(l));
    }
  }
  return out;
}

inline void TransactionGraph::finish_adjacency() {
  const Index n = node_count();
  in_degrees_.assign(n, 0);
  for (Index t : out_targets_) ++in_degrees_[t];

  // Undirected deduplicated neighbor lists (self excluded, ascending).
  std::vector<std::vector<Index>> und(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j : out_neighbors(i)) {
      if (i == j) continue;
      und[i].push_back(j);
      und[j].push_back(i);
    }
  }
  und_offsets_.assign(n + 1, 0);
  for (Index i = 0; i < n; ++i) {
    auto& v = und[i];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    und_offsets_[i + 1] = und_offsets_[i] + static_cast<Index>(v.size());
  }
  und_targets_.clear();
  und_targets_.reserve(und_offsets_[n]);
  for (const auto& v : und) und_targets_.insert(und_targets_.end(), v.begin(), v.end());
}

inline TransactionGraph TransactionGraph::assemble(
    Mat features, std::vector<Label> labels, std::vector<int> time_steps,
    std::vector<Index> out_offsets, std::vector<Index> out_targets,
    std::vector<std::string> ids) {
  TransactionGraph g;
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  g.time_steps_ = std::move(time_steps);
  g.out_offsets_ = std::move(out_offsets);
  g.out_targets_ = std::move(out_targets);
  g.index_to_id_ = std::move(ids);
  for (Index i = 0; i < g.node_count(); ++i) g.id_to_index_[g.index_to_id_[i]] = i;
  g.finish_adjacency();
  return g;
}

/// Builds the temporal graph from deduped records, validated edges and
/// normalized labels. Indices follow first-seen record order. Edges that
/// violate strict time ordering t_src < t_dst (including self-loops and
/// equal-step edges) are dropped and counted.
inline std::pair<TransactionGraph, IntegrityReport> build_graph(
    const std::vector<TransactionRecord>& records,
    const std::vector<RawEdge>& edges,
    const std::unordered_map<std::string, Label>& labels) {
  if (records.empty()) throw EmptyGraph("no records to build a graph from");

  TransactionGraph g;
  IntegrityReport report;

  const Index n = static_cast<Index>(records.size());
  const Index d = records[0].raw_features.size();
  g.features_.resize(n, d);
  g.labels_.resize(n);
  g.time_steps_.resize(n);
  g.index_to_id_.resize(n);
  g.id_to_index_.reserve(n * 2);
  for (Index i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (r.raw_features.size() != d)
      throw DimensionMismatch("record '" + r.external_id +
                              "' has inconsistent feature width");
    g.features_.row(i) = r.raw_features;
    g.time_steps_[i] = r.time_step;
    g.index_to_id_[i] = r.external_id;
    g.id_to_index_[r.external_id] = i;
    auto it = labels.find(r.external_id);
    g.labels_[i] = it == labels.end() ? Label::Unknown : it->second;
    ++report.label_histogram[static_cast<int>(g.labels_[i])];
  }

  std::vector<std::vector<Index>> adj(n);
  for (const auto& e : edges) {
    const Index s = g.id_to_index_.at(e.src);
    const Index t = g.id_to_index_.at(e.dst);
    if (g.time_steps_[s] < g.time_steps_[t]) {
      adj[s].push_back(t);
    } else {
      ++report.causality_edges_removed;
    }
  }
  g.out_offsets_.assign(n + 1, 0);
  for (Index i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    g.out_offsets_[i + 1] = g.out_offsets_[i] + static_cast<Index>(adj[i].size());
  }
  g.out_targets_.clear();
  g.out_targets_.reserve(g.out_offsets_[n]);
  for (const auto& v : adj) g.out_targets_.insert(g.out_targets_.end(), v.begin(), v.end());

  g.finish_adjacency();
  return {std::move(g), report};
}

/// Stratified node sample preserving class proportions: per-class quotas by
/// largest remainder, members drawn by seeded shuffle. fraction in (0, 1].
inline std::vector<Index> stratified_sample(const TransactionGraph& graph,
                                            double fraction, RandomSource& rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw FractionOutOfRange("sampling fraction must be in (0, 1]");

  const Index n = graph.node_count();
  std::array<std::vector<Index>, kNumLabelClasses> by_class;
  for (Index i = 0; i < n; ++i)
    by_class[static_cast<int>(graph.labels()[i])].push_back(i);

  const auto total = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  std::array<Index, kNumLabelClasses> quota{};
  std::array<double, kNumLabelClasses> remainder{};
  Index allocated = 0;
  for (int c = 0; c < kNumLabelClasses; ++c) {
    const double q = fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<Index>(std::floor(q + 1e-9));
    remainder[c] = q - static_cast<double>(quota[c]);
    allocated += quota[c];
  }
  std::array<int, kNumLabelClasses> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] != remainder[b] ? remainder[a] > remainder[b] : a < b;
  });
  for (int k = 0; allocated < total; ++k) {
    const int c = order[k % kNumLabelClasses];
    if (quota[c] < static_cast<Index>(by_class[c].size())) {
      ++quota[c];
      ++allocated;
    }
  }

  std::vector<Index> sample;
  sample.reserve(total);
  for (int c = 0; c < kNumLabelClasses; ++c) {
    auto& members = by_class[c];
    rng.shuffle(members.begin(), members.end());
    members.resize(std::min<std::size_t>(members.size(), quota[c]));
    sample.insert(sample.end(), members.begin(), members.end());
  }
  std::sort(sample.begin(), sample.end());
  return sample;
}

}  // namespace amlkit
