#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/chess/types.hpp"

namespace brilliant::search {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class Terminal : std::uint8_t { None = 0, Checkmate = 1, Stalemate = 2 };

// One visited node. Q is stored from the perspective of the side to move at
// this node; depth parity tells whose move that is relative to the root.
struct TreeNode {
  NodeId parent = kNoNode;
  chess::Move move{};  // edge from parent; unset for the root
  double prior = 1.0;  // policy prior on the parent edge; 1 for the root
  std::uint32_t visits = 0;
  double value_sum = 0.0;
  // Max prior over every legal move out of this node, visited or not; 0 when
  // the node was never expanded.
  double max_child_prior = 0.0;
  Terminal terminal = Terminal::None;
  std::uint16_t depth = 0;
  std::vector<NodeId> children;  // visited children, canonical move order

  double q() const { return visits ? value_sum / visits : 0.0; }
};

struct TreeMeta {
  std::string root_fen;
  std::string evaluator;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  double c_puct = 0.0;
  std::uint64_t evaluator_calls = 0;
  // True when the search stopped before `budget` calls because nothing
  // expandable remained.
  bool exhausted = false;
};

// Search result holding only visited nodes. Also buildable by hand for tests
// and synthetic feature inputs.
class SearchTree {
 public:
  SearchTree() = default;
  explicit SearchTree(TreeMeta meta) : meta_(std::move(meta)) {}

  NodeId add_root(std::uint32_t visits, double value_sum, double max_child_prior = 0.0,
                  Terminal terminal = Terminal::None);
  // Keeps the parent's child list in canonical move order.
  NodeId add_child(NodeId parent, chess::Move move, double prior, std::uint32_t visits, double value_sum,
                   double max_child_prior = 0.0, Terminal terminal = Terminal::None);

  static constexpr NodeId root() { return 0; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::span<const TreeNode> nodes() const { return nodes_; }

  std::optional<NodeId> find_child(NodeId parent, chess::Move move) const;

  const TreeMeta& meta() const { return meta_; }
  TreeMeta& meta() { return meta_; }

  // {"root_fen", "budget", ..., "nodes": [{id, parent_id, move_uci, prior,
  // visits, q, value_sum, max_child_prior, terminal}]}
  nlohmann::json to_json() const;
  static SearchTree from_json(const nlohmann::json& j);

 private:
  std::vector<TreeNode> nodes_;
  TreeMeta meta_;
};

// Structural equality: same nodes, moves, counts and values.
bool same_structure(const SearchTree& a, const SearchTree& b);

}  // namespace brilliant::search
