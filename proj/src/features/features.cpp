#include "brilliant/features/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "brilliant/error.hpp"

namespace brilliant::features {

using search::NodeId;
using search::SearchTree;
using search::TreeNode;

SubtreeVector fill_vector() {
  SubtreeVector v{};
  v[kRootQ] = -1.0;
  v[kMaxChildQ] = -1.0;
  return v;
}

double mover_q(const SearchTree& t, NodeId id) {
  const TreeNode& n = t.node(id);
  return n.depth % 2 == 0 ? n.q() : -n.q();
}

RootMoveClassification classify_root_moves(const SearchTree& t, chess::Move move_of_interest) {
  RootMoveClassification out;
  out.root_q = mover_q(t, SearchTree::root());
  for (const NodeId c : t.node(SearchTree::root()).children) {
    const TreeNode& n = t.node(c);
    if (n.visits == 0 || n.move == move_of_interest) continue;
    const double q = mover_q(t, c);
    out.groups[q - out.root_q > 0.0 ? 0 : 2].push_back(c);
    out.groups[q > 0.0 ? 1 : 3].push_back(c);
  }
  return out;
}

SubtreeVector subtree_features(const SearchTree& t, NodeId root) {
  SubtreeVector f{};
  const TreeNode& r = t.node(root);
  const double root_q = mover_q(t, root);

  double max_q = -1.0;
  std::uint32_t max_visits = 0;
  bool any_child = false;
  for (const NodeId c : r.children) {
    const TreeNode& n = t.node(c);
    if (n.visits == 0) continue;
    const double q = mover_q(t, c);
    f[q - root_q > 0.0 ? kIncreasingCount : kDecreasingCount] += 1.0;
    f[q > 0.0 ? kAdvantageCount : kDisadvantageCount] += 1.0;
    max_q = any_child ? std::max(max_q, q) : q;
    max_visits = std::max(max_visits, n.visits);
    any_child = true;
  }
  f[kRootQ] = root_q;
  f[kMaxChildQ] = max_q;
  f[kPrior] = r.prior;
  f[kVisits] = r.visits;
  f[kMaxChildPrior] = r.max_child_prior;
  f[kMaxChildVisits] = max_visits;

  // Level-order walk over visited nodes.
  std::vector<std::size_t> widths;
  std::size_t count = 1;
  std::size_t internal = 0;
  std::vector<NodeId> level{root};
  std::vector<NodeId> next;
  while (!level.empty()) {
    next.clear();
    for (const NodeId id : level) {
      bool has_child = false;
      for (const NodeId c : t.node(id).children) {
        if (t.node(c).visits == 0) continue;
        next.push_back(c);
        has_child = true;
      }
      internal += has_child;
    }
    if (!next.empty()) {
      widths.push_back(next.size());
      count += next.size();
    }
    level.swap(next);
  }

  const std::size_t height = widths.size();
  f[kBranching] = internal ? static_cast<double>(count - 1) / static_cast<double>(internal) : 0.0;
  for (std::size_t d = 0; d < 7 && d < height; ++d) f[kWidth1 + d] = static_cast<double>(widths[d]);
  if (height > 0) {
    double sum = 0.0;
    double mx = 0.0;
    for (const std::size_t w : widths) {
      sum += static_cast<double>(w);
      mx = std::max(mx, static_cast<double>(w));
    }
    const double mean = sum / static_cast<double>(height);
    double var = 0.0;
    for (const std::size_t w : widths) var += (static_cast<double>(w) - mean) * (static_cast<double>(w) - mean);
    f[kWidthMean] = mean;
    f[kWidthStd] = std::sqrt(var / static_cast<double>(height));
    f[kWidthMax] = mx;
  }
  f[kHeight] = static_cast<double>(height);
  return f;
}

namespace {

void write_group(std::span<const SubtreeVector> members, double* out) {
  double* mean = out;
  double* sd = out + kSubtreeDim;
  double* mn = out + 2 * kSubtreeDim;
  double* mx = out + 3 * kSubtreeDim;
  if (members.empty()) {
    const SubtreeVector fill = fill_vector();
    for (int a = 0; a < 4; ++a) std::copy(fill.begin(), fill.end(), out + a * kSubtreeDim);
    return;
  }
  const double n = static_cast<double>(members.size());
  for (std::size_t k = 0; k < kSubtreeDim; ++k) {
    double sum = 0.0;
    double lo = members[0][k];
    double hi = members[0][k];
    for (const SubtreeVector& m : members) {
      sum += m[k];
      lo = std::min(lo, m[k]);
      hi = std::max(hi, m[k]);
    }
    const double mu = sum / n;
    double var = 0.0;
    for (const SubtreeVector& m : members) var += (m[k] - mu) * (m[k] - mu);
    mean[k] = mu;
    sd[k] = std::sqrt(var / n);
    mn[k] = lo;
    mx[k] = hi;
  }
}

}  // namespace

std::vector<double> tree_features(const SearchTree& t, chess::Move move_of_interest) {
  if (t.empty()) throw DataError("cannot extract features from an empty tree");
  std::vector<double> out(kTreeDim, 0.0);
  const TreeNode& root = t.node(SearchTree::root());

  NodeId moi = search::kNoNode;
  NodeId best = search::kNoNode;
  for (const NodeId c : root.children) {
    const TreeNode& n = t.node(c);
    if (n.visits == 0) continue;
    if (n.move == move_of_interest) moi = c;
    if (best == search::kNoNode) {
      best = c;
      continue;
    }
    const double q = mover_q(t, c);
    const double bq = mover_q(t, best);
    if (q > bq || (q == bq && n.visits > t.node(best).visits)) best = c;
  }
  out[kContainsMove] = moi != search::kNoNode ? 1.0 : 0.0;
  out[kIsBest] = moi != search::kNoNode && moi == best ? 1.0 : 0.0;

  const SubtreeVector parent = subtree_features(t, SearchTree::root());
  std::copy(parent.begin(), parent.end(), out.begin() + kParentSubtree);
  const SubtreeVector child = moi != search::kNoNode ? subtree_features(t, moi) : fill_vector();
  std::copy(child.begin(), child.end(), out.begin() + kChildSubtree);

  const RootMoveClassification cls = classify_root_moves(t, move_of_interest);
  std::vector<SubtreeVector> members;
  for (int g = 0; g < 4; ++g) {
    members.clear();
    for (const NodeId c : cls.groups[g]) members.push_back(subtree_features(t, c));
    write_group(members, out.data() + kGroupsOffset + g * kGroupDim);
  }
  return out;
}

std::size_t DatumLayout::block_index(const std::string& evaluator, std::uint64_t budget) const {
  for (std::size_t e = 0; e < 2; ++e) {
    if (evaluators[e] != evaluator) continue;
    for (std::size_t b = 0; b < budgets.size(); ++b)
      if (budgets[b] == budget) return e * budgets.size() + b;
  }
  return kBlocks;
}

std::vector<std::string> DatumLayout::block_names() const {
  std::vector<std::string> out;
  for (const auto& e : evaluators)
    for (const auto b : budgets) out.push_back(fmt::format("{}@{}", e, format_budget(b)));
  return out;
}

nlohmann::json DatumLayout::to_json() const { return {{"evaluators", evaluators}, {"budgets", budgets}}; }

DatumLayout DatumLayout::from_json(const nlohmann::json& j) {
  DatumLayout l;
  try {
    l.evaluators = j.at("evaluators").get<std::array<std::string, 2>>();
    l.budgets = j.at("budgets").get<std::array<std::uint64_t, 5>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("datum layout: ") + e.what());
  }
  if (!std::is_sorted(l.budgets.begin(), l.budgets.end()) ||
      std::adjacent_find(l.budgets.begin(), l.budgets.end()) != l.budgets.end())
    throw DataError("datum layout budgets must be strictly ascending");
  return l;
}

std::string format_budget(std::uint64_t budget) {
  int k = 0;
  std::uint64_t v = budget;
  while (v >= 10 && v % 10 == 0) {
    v /= 10;
    ++k;
  }
  if (v == 1 && k > 0) return fmt::format("10^{}", k);
  return std::to_string(budget);
}

std::vector<double> datum_features(std::span<const SearchTree> trees, chess::Move move_of_interest,
                                   const DatumLayout& layout) {
  std::array<const SearchTree*, kBlocks> slots{};
  for (const SearchTree& t : trees) {
    const std::size_t i = layout.block_index(t.meta().evaluator, t.meta().budget);
    if (i == kBlocks)
      throw DataError(fmt::format("unexpected block ({}, {})", t.meta().evaluator, format_budget(t.meta().budget)));
    if (slots[i])
      throw DataError(fmt::format("duplicate block ({}, {})", t.meta().evaluator, format_budget(t.meta().budget)));
    slots[i] = &t;
  }
  for (std::size_t i = 0; i < kBlocks; ++i)
    if (!slots[i])
      throw DataError(fmt::format("missing block ({}, {})", layout.evaluators[i / layout.budgets.size()],
                                  format_budget(layout.budgets[i % layout.budgets.size()])));
  std::vector<double> out;
  out.reserve(kDatumDim);
  for (const SearchTree* t : slots) {
    const auto block = tree_features(*t, move_of_interest);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

}  // namespace brilliant::features
