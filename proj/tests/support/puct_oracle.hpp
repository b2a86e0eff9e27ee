#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "brilliant/chess/position.hpp"
#include "brilliant/search/evaluator.hpp"

namespace testsupport {

namespace chess = brilliant::chess;
using brilliant::chess::Move;
using brilliant::chess::Position;
using brilliant::search::Evaluation;
using brilliant::search::Evaluator;

class CountingEvaluator final : public Evaluator {
 public:
  explicit CountingEvaluator(Evaluator& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  bool deterministic() const override { return true; }
  Evaluation evaluate(const Position& p, std::span<const Move> legal) override {
    ++calls;
    return inner_.evaluate(p, legal);
  }
  std::uint64_t calls = 0;

 private:
  Evaluator& inner_;
};

// Straightforward re-derivation of PUCT: a pointer tree keyed by move, with
// every selection recomputed from the raw formula.
struct OracleNode {
  bool expanded = false;
  bool terminal = false;
  double terminal_value = 0.0;
  std::vector<Move> moves;
  std::vector<double> priors;
  std::map<Move, std::unique_ptr<OracleNode>> kids;
  int n = 0;
  double w = 0.0;
};

inline std::vector<std::vector<Move>> oracle_expansions(const Position& root, int budget, Evaluator& e, double c) {
  OracleNode top;
  std::vector<std::vector<Move>> order;
  int calls = 0;
  int idle = 0;
  while (calls < budget && idle < (1 << 20)) {
    std::vector<OracleNode*> path{&top};
    std::vector<Move> moves;
    Position pos = root;
    while (path.back()->expanded) {
      OracleNode* node = path.back();
      std::size_t pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < node->moves.size(); ++i) {
        const auto it = node->kids.find(node->moves[i]);
        const int cn = it == node->kids.end() ? 0 : it->second->n;
        const double q = cn == 0 ? 0.0 : -(it->second->w / cn);
        const double u = c * node->priors[i] * std::sqrt(double(node->n)) / (1 + cn);
        if (q + u > best) {
          best = q + u;
          pick = i;
        }
      }
      auto& slot = node->kids[node->moves[pick]];
      if (!slot) slot = std::make_unique<OracleNode>();
      pos = chess::apply_move_unchecked(pos, node->moves[pick]);
      moves.push_back(node->moves[pick]);
      path.push_back(slot.get());
    }
    OracleNode* leaf = path.back();
    double v;
    if (leaf->terminal) {
      v = leaf->terminal_value;
      ++idle;
    } else {
      const auto legal = chess::legal_moves(pos);
      if (legal.empty()) {
        leaf->terminal = true;
        leaf->terminal_value = pos.in_check() ? -1.0 : 0.0;
        v = leaf->terminal_value;
        ++idle;
      } else {
        const Evaluation ev = e.evaluate(pos, legal);
        ++calls;
        idle = 0;
        leaf->expanded = true;
        leaf->moves = legal;
        leaf->priors = ev.policy;
        v = ev.value;
        order.push_back(moves);
      }
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      (*it)->n += 1;
      (*it)->w += v;
      v = -v;
    }
  }
  return order;
}

}  // namespace testsupport
