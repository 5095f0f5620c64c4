#pragma once

#include "amlkit/graph.hpp"
#include "amlkit/types.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

namespace amlkit::nn {

/// Message-passing view of a graph: undirected deduplicated neighbor lists
/// (self excluded) plus the symmetric-normalized adjacency used by GCN,
/// A_hat = D^-1/2 (A_sym + I) D^-1/2.
struct Topology {
  Index n = 0;
  std::vector<Index> offsets{0};
  std::vector<Index> targets;
  Eigen::SparseMatrix<Scalar> a_hat;

  std::span<const Index> neighbors(Index i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }
  Index degree(Index i) const { return offsets[i + 1] - offsets[i]; }

  static Topology from_undirected_edges(
      Index n, const std::vector<std::pair<Index, Index>>& edges) {
    std::vector<std::vector<Index>> adj(n);
    for (auto [a, b] : edges) {
      if (a == b) continue;
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    return from_lists(n, std::move(adj));
  }

  static Topology from_graph(const TransactionGraph& g) {
    std::vector<std::vector<Index>> adj(g.node_count());
    for (Index i = 0; i < g.node_count(); ++i) {
      const auto nb = g.neighbors(i);
      adj[i].assign(nb.begin(), nb.end());
    }
    return from_lists(g.node_count(), std::move(adj));
  }

 private:
  static Topology from_lists(Index n, std::vector<std::vector<Index>> adj) {
    Topology t;
    t.n = n;
    t.offsets.assign(n + 1, 0);
    for (Index i = 0; i < n; ++i) {
      auto& v = adj[i];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      t.offsets[i + 1] = t.offsets[i] + static_cast<Index>(v.size());
    }
    t.targets.reserve(t.offsets[n]);
    for (const auto& v : adj) t.targets.insert(t.targets.end(), v.begin(), v.end());

    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(t.offsets[n] + n);
    std::vector<Scalar> inv_sqrt_deg(n);
    for (Index i = 0; i < n; ++i)
      inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<Scalar>(t.degree(i) + 1));
    for (Index i = 0; i < n; ++i) {
      trips.emplace_back(i, i, inv_sqrt_deg[i] * inv_sqrt_deg[i]);
      for (Index j : t.neighbors(i))
        trips.emplace_back(i, j, inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    t.a_hat.resize(n, n);
    t.a_hat.setFromTriplets(trips.begin(), trips.end());
    t.a_hat.makeCompressed();
    return t;
  }
};

}  // namespace amlkit::nn
