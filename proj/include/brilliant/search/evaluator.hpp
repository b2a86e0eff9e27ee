#pragma once

#include <span>
#include <string>
#include <vector>

#include "brilliant/chess/position.hpp"

namespace brilliant::search {

struct Evaluation {
  // Aligned with the legal-move span passed to evaluate(); sums to 1.
  std::vector<double> policy;
  // Side-to-move perspective, in [-1, 1].
  double value = 0.0;
};

// Policy/value oracle driving the tree search. Never called on terminal
// positions.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;

  // `legal` is legal_moves(p) in canonical order and is never empty.
  virtual Evaluation evaluate(const chess::Position& p, std::span<const chess::Move> legal) = 0;

  // Called once at the start of every search; stateful evaluators reset
  // per-search caches here.
  virtual void begin_search() {}
};

}  // namespace brilliant::search
