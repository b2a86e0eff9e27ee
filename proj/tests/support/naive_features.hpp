#pragma once

// Brute-force feature extractor used as an oracle. Shares no code with the
// library: ancestry and depth come from walking parent links node by node.

#include <algorithm>
#include <cmath>
#include <vector>

#include "brilliant/search/tree.hpp"

namespace naive {

using brilliant::search::NodeId;
using brilliant::search::SearchTree;

// Number of parent steps from `id` up to `anc`, or -1 if `anc` is not an
// ancestor (or self). Every node on the way must have been visited.
inline int distance_below(const SearchTree& t, NodeId id, NodeId anc) {
  int d = 0;
  for (NodeId cur = id; cur != brilliant::search::kNoNode; cur = t.node(cur).parent) {
    if (t.node(cur).visits == 0) return -1;
    if (cur == anc) return d;
    ++d;
  }
  return -1;
}

inline double mover_q(const SearchTree& t, NodeId id) {
  const int d = distance_below(t, id, 0);
  const double q = t.node(id).visits ? t.node(id).value_sum / t.node(id).visits : 0.0;
  return (d >= 0 && d % 2 == 1) || (d < 0 && t.node(id).depth % 2 == 1) ? -q : q;
}

// Visited direct children of `id`, sorted by move.
inline std::vector<NodeId> kids(const SearchTree& t, NodeId id) {
  std::vector<NodeId> out;
  for (NodeId k = 0; k < static_cast<NodeId>(t.size()); ++k)
    if (t.node(k).parent == id && t.node(k).visits > 0) out.push_back(k);
  std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) { return t.node(a).move < t.node(b).move; });
  return out;
}

inline std::vector<double> fill() {
  std::vector<double> f(22, 0.0);
  f[4] = f[5] = -1.0;
  return f;
}

inline std::vector<double> subtree(const SearchTree& t, NodeId x) {
  std::vector<double> f(22, 0.0);
  const double qx = mover_q(t, x);
  double best_q = -1.0;
  double best_n = 0.0;
  for (const NodeId c : kids(t, x)) {
    const double qc = mover_q(t, c);
    if (qc - qx > 0) f[0] += 1; else f[2] += 1;
    if (qc > 0) f[1] += 1; else f[3] += 1;
    if (qc > best_q) best_q = qc;
    if (t.node(c).visits > best_n) best_n = t.node(c).visits;
  }
  f[4] = qx;
  f[5] = best_q;
  f[6] = t.node(x).prior;
  f[7] = t.node(x).visits;
  f[8] = t.node(x).max_child_prior;
  f[9] = best_n;

  std::vector<double> width(std::max<std::size_t>(t.size() + 1, 8), 0.0);
  int height = 0;
  double members = 0;
  std::vector<bool> has_child(t.size(), false);
  for (NodeId y = 0; y < static_cast<NodeId>(t.size()); ++y) {
    const int d = distance_below(t, y, x);
    if (d < 0) continue;
    members += 1;
    if (d > 0) {
      width[static_cast<std::size_t>(d)] += 1;
      has_child[static_cast<std::size_t>(t.node(y).parent)] = true;
    }
    height = std::max(height, d);
  }
  double internal = 0;
  for (const bool b : has_child) internal += b;
  f[10] = internal > 0 ? (members - 1) / internal : 0.0;
  for (int d = 1; d <= 7; ++d) f[10 + d] = width[static_cast<std::size_t>(d)];
  if (height > 0) {
    double s = 0, m = 0;
    for (int d = 1; d <= height; ++d) {
      s += width[static_cast<std::size_t>(d)];
      m = std::max(m, width[static_cast<std::size_t>(d)]);
    }
    const double mean = s / height;
    double v = 0;
    for (int d = 1; d <= height; ++d) v += (width[static_cast<std::size_t>(d)] - mean) * (width[static_cast<std::size_t>(d)] - mean);
    f[18] = mean;
    f[19] = std::sqrt(v / height);
    f[20] = m;
  }
  f[21] = height;
  return f;
}

inline std::vector<double> tree(const SearchTree& t, brilliant::chess::Move moi) {
  std::vector<double> out;
  const std::vector<NodeId> rk = kids(t, 0);
  NodeId hit = -1;
  for (const NodeId c : rk)
    if (t.node(c).move == moi) hit = c;
  // Best: highest mover Q, then most visits, then smallest move.
  NodeId best = -1;
  for (const NodeId c : rk) {
    if (best < 0) {
      best = c;
      continue;
    }
    const double a = mover_q(t, c), b = mover_q(t, best);
    if (a > b || (a == b && t.node(c).visits > t.node(best).visits)) best = c;
  }
  out.push_back(hit >= 0 ? 1.0 : 0.0);
  out.push_back(hit >= 0 && hit == best ? 1.0 : 0.0);
  for (const double v : subtree(t, 0)) out.push_back(v);
  for (const double v : hit >= 0 ? subtree(t, hit) : fill()) out.push_back(v);

  const double q0 = mover_q(t, 0);
  for (int g = 0; g < 4; ++g) {
    std::vector<std::vector<double>> group;
    for (const NodeId c : rk) {
      if (c == hit) continue;
      const double q = mover_q(t, c);
      const bool in = g == 0 ? q - q0 > 0 : g == 1 ? q > 0 : g == 2 ? !(q - q0 > 0) : !(q > 0);
      if (in) group.push_back(subtree(t, c));
    }
    if (group.empty()) {
      for (int a = 0; a < 4; ++a)
        for (const double v : fill()) out.push_back(v);
      continue;
    }
    std::vector<double> mean(22), sd(22), lo(22), hi(22);
    for (int k = 0; k < 22; ++k) {
      double s = 0;
      lo[k] = hi[k] = group[0][k];
      for (const auto& m : group) {
        s += m[k];
        lo[k] = std::min(lo[k], m[k]);
        hi[k] = std::max(hi[k], m[k]);
      }
      mean[k] = s / static_cast<double>(group.size());
      double v = 0;
      for (const auto& m : group) v += (m[k] - mean[k]) * (m[k] - mean[k]);
      sd[k] = std::sqrt(v / static_cast<double>(group.size()));
    }
    for (const auto* part : {&mean, &sd, &lo, &hi}) out.insert(out.end(), part->begin(), part->end());
  }
  return out;
}

}  // namespace naive
