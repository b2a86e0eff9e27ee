#include "brilliant/search/mcts.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"

namespace brilliant::search {

namespace {

struct Edge {
  chess::Move move;
  double prior = 0.0;
  NodeId child = kNoNode;
};

struct WorkNode {
  NodeId parent = kNoNode;
  chess::Move move{};
  double prior = 1.0;
  std::uint32_t visits = 0;
  double value_sum = 0.0;
  std::uint32_t edge_begin = 0;
  std::uint32_t edge_count = 0;
  std::uint16_t depth = 0;
  bool expanded = false;
  // No unexpanded non-terminal node remains below (or at) this node.
  bool closed = false;
  Terminal terminal = Terminal::None;
};

class Searcher {
 public:
  Searcher(const chess::Position& root, Evaluator& evaluator, const SearchConfig& config,
           const SearchObserver* observer)
      : root_(root), evaluator_(evaluator), config_(config), observer_(observer) {
    nodes_.push_back(WorkNode{});
  }

  // Runs until `calls_` reaches target or the tree is exhausted.
  void run_until(std::uint64_t target) {
    while (calls_ < target && !nodes_[0].closed && idle_ < config_.max_idle_iterations) {
      const std::uint64_t before = calls_;
      iterate();
      idle_ = calls_ == before ? idle_ + 1 : 0;
    }
  }

  bool exhausted(std::uint64_t target) const { return calls_ < target; }
  std::uint64_t calls() const { return calls_; }

  SearchTree snapshot(std::uint64_t budget) const {
    TreeMeta meta;
    meta.root_fen = chess::to_fen(root_);
    meta.evaluator = evaluator_.name();
    meta.budget = budget;
    meta.seed = config_.seed;
    meta.c_puct = config_.c_puct;
    meta.evaluator_calls = calls_;
    meta.exhausted = exhausted(budget);
    SearchTree tree(std::move(meta));
    // Work nodes are created in visit order, so ids carry over unchanged.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const WorkNode& w = nodes_[i];
      double max_prior = 0.0;
      for (std::uint32_t e = 0; e < w.edge_count; ++e) max_prior = std::max(max_prior, edges_[w.edge_begin + e].prior);
      if (i == 0) {
        tree.add_root(w.visits, w.value_sum, max_prior, w.terminal);
      } else {
        tree.add_child(w.parent, w.move, w.prior, w.visits, w.value_sum, max_prior, w.terminal);
      }
    }
    return tree;
  }

 private:
  void iterate() {
    path_nodes_.clear();
    path_moves_.clear();
    chess::Position pos = root_;
    NodeId current = 0;
    path_nodes_.push_back(0);
    while (nodes_[current].expanded) {
      const std::uint32_t e = select_edge(current);
      Edge& edge = edges_[e];
      pos = chess::apply_move_unchecked(pos, edge.move);
      path_moves_.push_back(edge.move);
      if (edge.child == kNoNode) {
        WorkNode child;
        child.parent = current;
        child.move = edge.move;
        child.prior = edge.prior;
        child.depth = static_cast<std::uint16_t>(nodes_[current].depth + 1);
        edge.child = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(child);
      }
      current = edge.child;
      path_nodes_.push_back(current);
    }

    double value = 0.0;
    WorkNode& leaf = nodes_[current];
    if (leaf.terminal != Terminal::None) {
      value = terminal_value(leaf.terminal);
      if (observer_ && observer_->on_terminal) observer_->on_terminal(path_moves_, leaf.terminal);
    } else {
      const auto legal = chess::legal_moves(pos);
      if (legal.empty()) {
        leaf.terminal = pos.in_check() ? Terminal::Checkmate : Terminal::Stalemate;
        leaf.closed = true;
        value = terminal_value(leaf.terminal);
        if (observer_ && observer_->on_terminal) observer_->on_terminal(path_moves_, leaf.terminal);
      } else {
        Evaluation ev = evaluator_.evaluate(pos, legal);
        ++calls_;
        check_evaluation(ev, legal.size(), pos);
        WorkNode& node = nodes_[current];
        node.edge_begin = static_cast<std::uint32_t>(edges_.size());
        node.edge_count = static_cast<std::uint32_t>(legal.size());
        for (std::size_t i = 0; i < legal.size(); ++i) edges_.push_back(Edge{legal[i], ev.policy[i], kNoNode});
        node.expanded = true;
        value = ev.value;
        if (observer_ && observer_->on_expand) observer_->on_expand(path_moves_);
      }
    }

    // Values alternate sign on the way up: each node stores its own
    // side-to-move perspective.
    for (auto it = path_nodes_.rbegin(); it != path_nodes_.rend(); ++it) {
      WorkNode& n = nodes_[*it];
      n.visits += 1;
      n.value_sum += value;
      value = -value;
    }
    propagate_closed();
  }

  std::uint32_t select_edge(NodeId id) const {
    const WorkNode& n = nodes_[id];
    std::uint32_t best = n.edge_begin;
    double best_score = -1e300;
    for (std::uint32_t e = n.edge_begin; e < n.edge_begin + n.edge_count; ++e) {
      const Edge& edge = edges_[e];
      std::uint32_t child_visits = 0;
      double q = 0.0;  // first-play urgency for unvisited children
      if (edge.child != kNoNode) {
        const WorkNode& c = nodes_[edge.child];
        child_visits = c.visits;
        if (c.visits) q = -c.value_sum / c.visits;
      }
      const double score = puct_score(q, edge.prior, n.visits, child_visits, config_.c_puct);
      if (score > best_score) {
        best_score = score;
        best = e;
      }
    }
    return best;
  }

  void propagate_closed() {
    for (auto it = path_nodes_.rbegin(); it != path_nodes_.rend(); ++it) {
      WorkNode& n = nodes_[*it];
      if (n.closed) continue;
      if (!n.expanded) return;
      for (std::uint32_t e = n.edge_begin; e < n.edge_begin + n.edge_count; ++e) {
        const NodeId c = edges_[e].child;
        if (c == kNoNode || !nodes_[c].closed) return;
      }
      n.closed = true;
    }
  }

  static double terminal_value(Terminal t) { return t == Terminal::Checkmate ? -1.0 : 0.0; }

  static void check_evaluation(const Evaluation& ev, std::size_t legal_count, const chess::Position& pos) {
    if (ev.policy.size() != legal_count)
      throw ProtocolError(fmt::format("evaluator returned {} priors for {} legal moves at {}", ev.policy.size(),
                                      legal_count, chess::to_fen(pos)));
    if (!std::isfinite(ev.value) || ev.value < -1.0 || ev.value > 1.0)
      throw ProtocolError(fmt::format("evaluator value {} outside [-1, 1] at {}", ev.value, chess::to_fen(pos)));
    for (const double p : ev.policy)
      if (!std::isfinite(p) || p < 0.0)
        throw ProtocolError(fmt::format("evaluator prior {} invalid at {}", p, chess::to_fen(pos)));
  }

  chess::Position root_;
  Evaluator& evaluator_;
  SearchConfig config_;
  const SearchObserver* observer_;
  std::vector<WorkNode> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeId> path_nodes_;
  std::vector<chess::Move> path_moves_;
  std::uint64_t calls_ = 0;
  std::uint64_t idle_ = 0;
};

void check_root(const chess::Position& root) {
  if (chess::status(root) != chess::GameStatus::Ongoing)
    throw DataError(fmt::format("cannot search terminal position {}", chess::to_fen(root)));
}

}  // namespace

SearchTree run_search(const chess::Position& root, std::uint64_t budget, Evaluator& evaluator,
                      const SearchConfig& config, const SearchObserver* observer) {
  if (budget < 1) throw DataError("search budget must be >= 1");
  check_root(root);
  evaluator.begin_search();
  Searcher s(root, evaluator, config, observer);
  s.run_until(budget);
  return s.snapshot(budget);
}

std::vector<SearchTree> run_search_ladder(const chess::Position& root, std::span<const std::uint64_t> budgets,
                                          Evaluator& evaluator, const SearchConfig& config) {
  if (budgets.empty()) return {};
  if (!std::is_sorted(budgets.begin(), budgets.end()) || budgets.front() < 1)
    throw DataError("search budgets must be ascending and >= 1");
  check_root(root);
  evaluator.begin_search();
  Searcher s(root, evaluator, config, nullptr);
  std::vector<SearchTree> out;
  out.reserve(budgets.size());
  for (const std::uint64_t b : budgets) {
    s.run_until(b);
    out.push_back(s.snapshot(b));
  }
  return out;
}

}  // namespace brilliant::search
