#pragma once

#include "amlkit/graph.hpp"
#include "amlkit/quantum/random_source.hpp"
#include "amlkit/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

namespace amlkit {

enum class Part : std::uint8_t { Train = 0, Val = 1, Test = 2, Excluded = 3 };

inline const char* part_name(Part p) {
  switch (p) {
    case Part::Train:
      return "train";
    case Part::Val:
      return "val";
    case Part::Test:
      return "test";
    default:
      return "excluded";
  }
}

enum class SplitMode : std::uint8_t { Stratified = 0, Chronological = 1 };

inline const char* split_mode_name(SplitMode m) {
  return m == SplitMode::Stratified ? "stratified" : "chronological";
}

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
};

/// Node -> part assignment. Unknown-label nodes are always Excluded: they
/// stay in the graph for message passing but never enter loss or metrics.
struct SplitAssignment {
  std::vector<Part> assignment;
  SplitMode mode = SplitMode::Stratified;
  SplitRatios ratios;
  std::optional<std::pair<double, double>> alpha_beta;

  std::vector<Index> part_indices(Part p) const {
    std::vector<Index> out;
    for (Index i = 0; i < static_cast<Index>(assignment.size()); ++i)
      if (assignment[i] == p) out.push_back(i);
    return out;
  }
};

namespace detail {

/// Splits count into three integers proportional to ratios, each within one
/// of its exact quota (largest-remainder rounding).
inline std::array<Index, 3> largest_remainder(Index count,
                                              const std::array<double, 3>& ratios) {
  std::array<Index, 3> alloc{};
  std::array<double, 3> rem{};
  Index used = 0;
  for (int p = 0; p < 3; ++p) {
    const double q = ratios[p] * static_cast<double>(count);
    alloc[p] = static_cast<Index>(std::floor(q + 1e-9));
    rem[p] = q - static_cast<double>(alloc[p]);
    used += alloc[p];
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return rem[a] != rem[b] ? rem[a] > rem[b] : a < b; });
  for (int k = 0; used < count; ++k) {
    ++alloc[order[k % 3]];
    ++used;
  }
  return alloc;
}

}  // namespace detail

/// Class-stratified random split of the labeled nodes. Each class is split by
/// the ratios with largest-remainder rounding, so per-class counts deviate
/// from the exact quota by at most one node per part.
inline SplitAssignment stratified_split(const TransactionGraph& g,
                                        SplitRatios ratios, RandomSource& rng) {
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0))
    throw Error("split ratios must all be positive");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw Error("split ratios must sum to 1");

  SplitAssignment s;
  s.mode = SplitMode::Stratified;
  s.ratios = ratios;
  s.assignment.assign(g.node_count(), Part::Excluded);

  for (Label cls : {Label::Licit, Label::Illicit}) {
    std::vector<Index> members;
    for (Index i = 0; i < g.node_count(); ++i)
      if (g.labels()[i] == cls) members.push_back(i);
    if (members.size() < 3)
      throw ClassTooSmall(std::string("class ") + label_name(cls) +
                          " has fewer labeled nodes than parts");
    rng.shuffle(members.begin(), members.end());
    const auto alloc = detail::largest_remainder(
        static_cast<Index>(members.size()), {ratios.train, ratios.val, ratios.test});
    Index pos = 0;
    for (int p = 0; p < 3; ++p)
      for (Index k = 0; k < alloc[p]; ++k)
        s.assignment[members[pos++]] = static_cast<Part>(p);
  }
  return s;
}

/// Chronological split over time steps: train gets steps 1..floor(alpha*T),
/// val the steps through floor(beta*T), test the rest. Strict time ordering
/// between parts holds by construction.
inline SplitAssignment chronological_split(const TransactionGraph& g,
                                           double alpha, double beta) {
  if (!(0.0 < alpha && alpha < beta && beta < 1.0))
    throw Error("require 0 < alpha < beta < 1");

  std::set<int> distinct(g.time_steps().begin(), g.time_steps().end());
  if (distinct.size() < 3)
    throw DegenerateWindow("need at least 3 distinct time steps");

  const int t_max = *distinct.rbegin();
  const int train_end = static_cast<int>(std::floor(alpha * t_max + 1e-9));
  const int val_end = static_cast<int>(std::floor(beta * t_max + 1e-9));
  if (train_end < 1 || val_end <= train_end || val_end >= t_max)
    throw DegenerateWindow("alpha/beta windows leave an empty part");

  SplitAssignment s;
  s.mode = SplitMode::Chronological;
  s.ratios = {alpha, beta - alpha, 1.0 - beta};
  s.alpha_beta = {alpha, beta};
  s.assignment.assign(g.node_count(), Part::Excluded);

  std::array<Index, 3> counts{};
  for (Index i = 0; i < g.node_count(); ++i) {
    if (g.labels()[i] == Label::Unknown) continue;
    const int t = g.time_steps()[i];
    const Part p = t <= train_end ? Part::Train
                   : t <= val_end ? Part::Val
                                  : Part::Test;
    s.assignment[i] = p;
    ++counts[static_cast<int>(p)];
  }
  if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0)
    throw DegenerateWindow("a chronological part holds no labeled node");
  return s;
}

}  // namespace amlkit
