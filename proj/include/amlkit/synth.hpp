#pragma once

#include "amlkit/graph.hpp"
#include "amlkit/quantum/random_source.hpp"
#include "amlkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

namespace amlkit {

/// Desk-scale planted-fraud benchmark: an illicit community transacting
/// densely among its temporally close members (layered flows) on top of a
/// sparse causal background, with class-separable feature noise.
struct SyntheticSpec {
  Index node_count = 2000;
  int time_steps = 49;
  double illicit_fraction = 0.03;
  double community_density = 0.5;   // edge prob between near-in-time illicit pairs
  int community_window = 3;         // max step gap for community edges
  double background_out_degree = 2.0;  // mean causal background edges per node
  double feature_noise = 1.0;
  double feature_shift = 2.4;  // illicit mean offset on the signal columns
  Index feature_dim = 16;
  double label_rate = 0.9;  // labeled share; the rest become unknown
  std::uint64_t seed = 1;

  void validate() const {
    if (node_count < 10) throw InvalidSpec("node_count must be at least 10");
    if (time_steps < 3) throw InvalidSpec("time_steps must be at least 3");
    if (!(illicit_fraction > 0.0) || illicit_fraction >= 1.0)
      throw InvalidSpec("illicit_fraction must be in (0, 1)");
    if (community_density < 0.0 || community_density > 1.0)
      throw InvalidSpec("community_density must be in [0, 1]");
    if (feature_dim < 2) throw InvalidSpec("feature_dim must be at least 2");
    if (!(label_rate > 0.0) || label_rate > 1.0)
      throw InvalidSpec("label_rate must be in (0, 1]");
    if (feature_noise < 0.0) throw InvalidSpec("feature_noise must be non-negative");
    if (background_out_degree < 0.0)
      throw InvalidSpec("background_out_degree must be non-negative");
  }
};

struct SyntheticData {
  std::vector<TransactionRecord> records;
  std::vector<RawEdge> edges;
  std::unordered_map<std::string, Label> labels;
};

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  RandomSource rng = RandomSource::seeded(spec.seed);
  const Index n = spec.node_count;

  std::vector<int> step(n);
  for (Index i = 0; i < n; ++i)
    step[i] = 1 + static_cast<int>(rng.uniform_index(spec.time_steps));

  const Index n_illicit =
      static_cast<Index>(std::llround(spec.illicit_fraction * static_cast<double>(n)));
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<bool> illicit(n, false);
  std::vector<Index> community(order.begin(), order.begin() + n_illicit);
  for (Index i : community) illicit[i] = true;

  SyntheticData data;
  auto node_id = [](Index i) { return "tx" + std::to_string(i); };

  // Features: zero-mean noise for licit nodes, a mean shift on the first
  // quarter of the columns for illicit ones.
  const Index signal_cols = std::max<Index>(1, spec.feature_dim / 4);
  data.records.reserve(n);
  for (Index i = 0; i < n; ++i) {
    RowVec f(spec.feature_dim);
    for (Index j = 0; j < spec.feature_dim; ++j)
      f[j] = spec.feature_noise * rng.normal() +
             (illicit[i] && j < signal_cols ? spec.feature_shift : 0.0);
    data.records.push_back({node_id(i), step[i], std::move(f)});
  }

  // Planted community: layered flows between temporally close illicit pairs.
  std::sort(community.begin(), community.end(),
            [&](Index a, Index b) { return step[a] != step[b] ? step[a] < step[b] : a < b; });
  for (std::size_t a = 0; a < community.size(); ++a) {
    for (std::size_t b = a + 1; b < community.size(); ++b) {
      const Index u = community[a], v = community[b];
      if (step[v] <= step[u]) continue;
      if (step[v] - step[u] > spec.community_window) continue;
      if (rng.uniform() < spec.community_density)
        data.edges.push_back({node_id(u), node_id(v)});
    }
  }

  // Causal background: each node attempts a few forward edges.
  for (Index i = 0; i < n; ++i) {
    int attempts = static_cast<int>(spec.background_out_degree);
    if (rng.uniform() < spec.background_out_degree - attempts) ++attempts;
    for (int e = 0; e < attempts; ++e) {
      for (int tries = 0; tries < 8; ++tries) {
        const Index j = static_cast<Index>(rng.uniform_index(n));
        if (step[j] > step[i]) {
          data.edges.push_back({node_id(i), node_id(j)});
          break;
        }
      }
    }
  }

  // Labels: unlabel a share uniformly at random.
  for (Index i = 0; i < n; ++i) {
    const bool labeled = rng.uniform() < spec.label_rate;
    data.labels[node_id(i)] =
        !labeled ? Label::Unknown : (illicit[i] ? Label::Illicit : Label::Licit);
  }
  return data;
}

/// Generates and builds in one step, running the same integrity pipeline as
/// real ingestion.
inline std::pair<TransactionGraph, IntegrityReport> synthesize_graph(
    const SyntheticSpec& spec) {
  SyntheticData data = generate_synthetic(spec);
  auto [records, dup] = dedupe_nodes(data.records);
  std::unordered_set<std::string> ids;
  for (const auto& r : records) ids.insert(r.external_id);
  auto [edges, dangling] = validate_edges(data.edges, ids);
  auto [graph, report] = build_graph(records, edges, data.labels);
  report.duplicates_removed = dup;
  report.dangling_edges_removed = dangling;
  return {std::move(graph), report};
}

}  // namespace amlkit
