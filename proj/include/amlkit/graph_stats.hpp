#pragma once

#include "amlkit/graph.hpp"
#include "amlkit/types.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

namespace amlkit {

struct GraphStats {
  std::map<Index, Index> degree_histogram;  // total degree -> node count
  Index component_count = 0;
  double gamma_estimate = 0.0;  // power-law exponent over degrees >= d_min
  Index gamma_sample_size = 0;  // nodes entering the fit
};

/// Hurwitz zeta sum_{k>=0} (a+k)^-s for s > 1, a > 0 (Euler-Maclaurin tail).
inline double hurwitz_zeta(double s, double a) {
  const int kDirect = 32;
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(a + k, -s);
  const double b = a + kDirect;
  sum += std::pow(b, 1.0 - s) / (s - 1.0);
  sum += 0.5 * std::pow(b, -s);
  sum += s * std::pow(b, -s - 1.0) / 12.0;
  sum -= s * (s + 1.0) * (s + 2.0) * std::pow(b, -s - 3.0) / 720.0;
  return sum;
}

/// Maximum-likelihood exponent of a discrete power law P(d) ~ d^-gamma over
/// samples d >= d_min: minimizes n*ln zeta(g, d_min) + g*sum(ln d) by golden
/// section. Deterministic; accurate where the classic continuous
/// approximation is visibly biased for small d_min.
inline double power_law_mle(const std::vector<Index>& degrees, Index d_min) {
  double log_sum = 0.0;
  Index n = 0;
  for (Index d : degrees) {
    if (d >= d_min) {
      log_sum += std::log(static_cast<double>(d));
      ++n;
    }
  }
  if (n == 0) throw DegenerateDegrees("no degrees >= d_min to fit");

  const double a = static_cast<double>(d_min);
  auto nll = [&](double g) {
    return static_cast<double>(n) * std::log(hurwitz_zeta(g, a)) + g * log_sum;
  };
  double lo = 1.001, hi = 12.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double m1 = hi - inv_phi * (hi - lo);
  double m2 = lo + inv_phi * (hi - lo);
  double f1 = nll(m1), f2 = nll(m2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - inv_phi * (hi - lo);
      f1 = nll(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + inv_phi * (hi - lo);
      f2 = nll(m2);
    }
  }
  return 0.5 * (lo + hi);
}

/// Degree histogram, weakly connected component count (undirected view) and
/// the fitted power-law exponent over total degrees >= d_min.
inline GraphStats graph_stats(const TransactionGraph& g, Index d_min = 2) {
  const Index n = g.node_count();
  if (n < 2) throw Error("graph_stats requires at least 2 nodes");

  GraphStats stats;
  std::vector<Index> degrees(n);
  for (Index i = 0; i < n; ++i) {
    degrees[i] = g.total_degree(i);
    ++stats.degree_histogram[degrees[i]];
  }
  if (stats.degree_histogram.size() == 1)
    throw DegenerateDegrees("all node degrees equal; exponent undefined");

  // Union-find over the undirected view.
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index i = 0; i < n; ++i) {
    for (Index j : g.out_neighbors(i)) {
      const Index a = find(i), b = find(j);
      if (a != b) parent[a] = b;
    }
  }
  for (Index i = 0; i < n; ++i) stats.component_count += (find(i) == i) ? 1 : 0;

  for (Index d : degrees) stats.gamma_sample_size += (d >= d_min) ? 1 : 0;
  stats.gamma_estimate = power_law_mle(degrees, d_min);
  return stats;
}

}  // namespace amlkit
