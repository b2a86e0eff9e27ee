#include "brilliant/search/tree.hpp"

#include <algorithm>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"

namespace brilliant::search {

NodeId SearchTree::add_root(std::uint32_t visits, double value_sum, double max_child_prior, Terminal terminal) {
  if (!nodes_.empty()) throw DataError("search tree already has a root");
  TreeNode n;
  n.visits = visits;
  n.value_sum = value_sum;
  n.max_child_prior = max_child_prior;
  n.terminal = terminal;
  nodes_.push_back(std::move(n));
  return 0;
}

NodeId SearchTree::add_child(NodeId parent, chess::Move move, double prior, std::uint32_t visits, double value_sum,
                             double max_child_prior, Terminal terminal) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size()) throw DataError("unknown parent node");
  const NodeId id = static_cast<NodeId>(nodes_.size());
  TreeNode n;
  n.parent = parent;
  n.move = move;
  n.prior = prior;
  n.visits = visits;
  n.value_sum = value_sum;
  n.max_child_prior = max_child_prior;
  n.terminal = terminal;
  n.depth = static_cast<std::uint16_t>(nodes_[static_cast<std::size_t>(parent)].depth + 1);
  nodes_.push_back(std::move(n));

  auto& kids = nodes_[static_cast<std::size_t>(parent)].children;
  const auto pos = std::lower_bound(kids.begin(), kids.end(), move,
                                    [this](NodeId k, const chess::Move& m) { return node(k).move < m; });
  if (pos != kids.end() && node(*pos).move == move) throw DataError("duplicate child move");
  kids.insert(pos, id);
  return id;
}

std::optional<NodeId> SearchTree::find_child(NodeId parent, chess::Move move) const {
  for (const NodeId k : node(parent).children)
    if (node(k).move == move) return k;
  return std::nullopt;
}

nlohmann::json SearchTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    nodes.push_back({
        {"id", i},
        {"parent_id", n.parent == kNoNode ? nlohmann::json(nullptr) : nlohmann::json(n.parent)},
        {"move_uci", n.parent == kNoNode ? std::string() : chess::move_to_uci(n.move)},
        {"prior", n.prior},
        {"visits", n.visits},
        {"q", n.q()},
        {"value_sum", n.value_sum},
        {"max_child_prior", n.max_child_prior},
        {"terminal", static_cast<int>(n.terminal)},
    });
  }
  return {
      {"root_fen", meta_.root_fen},
      {"evaluator", meta_.evaluator},
      {"budget", meta_.budget},
      {"seed", meta_.seed},
      {"c_puct", meta_.c_puct},
      {"evaluator_calls", meta_.evaluator_calls},
      {"exhausted", meta_.exhausted},
      {"nodes", std::move(nodes)},
  };
}

SearchTree SearchTree::from_json(const nlohmann::json& j) {
  try {
    TreeMeta meta;
    meta.root_fen = j.value("root_fen", "");
    meta.evaluator = j.value("evaluator", "");
    meta.budget = j.value("budget", std::uint64_t{0});
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.c_puct = j.value("c_puct", 0.0);
    meta.evaluator_calls = j.value("evaluator_calls", std::uint64_t{0});
    meta.exhausted = j.value("exhausted", false);
    SearchTree t(std::move(meta));
    for (const auto& n : j.at("nodes")) {
      const auto visits = n.at("visits").get<std::uint32_t>();
      const double value_sum = n.contains("value_sum") ? n.at("value_sum").get<double>()
                                                        : n.at("q").get<double>() * visits;
      const auto terminal = static_cast<Terminal>(n.value("terminal", 0));
      const double mcp = n.value("max_child_prior", 0.0);
      if (n.at("parent_id").is_null()) {
        t.add_root(visits, value_sum, mcp, terminal);
      } else {
        t.add_child(n.at("parent_id").get<NodeId>(), chess::parse_uci(n.at("move_uci").get<std::string>()),
                    n.at("prior").get<double>(), visits, value_sum, mcp, terminal);
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("tree JSON: ") + e.what());
  }
}

bool same_structure(const SearchTree& a, const SearchTree& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TreeNode& x = a.nodes()[i];
    const TreeNode& y = b.nodes()[i];
    if (x.parent != y.parent || x.move != y.move || x.prior != y.prior || x.visits != y.visits ||
        x.value_sum != y.value_sum || x.max_child_prior != y.max_child_prior || x.terminal != y.terminal ||
        x.children != y.children)
      return false;
  }
  return true;
}

}  // namespace brilliant::search
