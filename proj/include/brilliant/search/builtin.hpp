#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "brilliant/search/evaluator.hpp"

namespace brilliant::search {

// Term weights for the builtin evaluators. Scores are in pawn units; `version`
// changes whenever a default changes so cached trees can be invalidated.
struct EvalWeights {
  std::string version = "builtin-v1";
  double lambda = 0.2;  // value = tanh(lambda * score)
  double pawn = 1.0;
  double knight = 3.0;
  double bishop = 3.25;
  double rook = 5.0;
  double queen = 9.0;
  double mobility = 0.01;     // per attacked square of N/B/R/Q
  double king_safety = 0.05;  // per attacked square next to the own king
  double tau_strong = 0.5;
  double tau_weak = 2.0;
  double capture_bias = 0.5;
  double mate_score = 100.0;

  nlohmann::json to_json() const;
  static EvalWeights from_json(const nlohmann::json& j);
  // FNV-1a over the canonical JSON dump; recorded in tree metadata.
  std::uint64_t hash() const;
};

// Material balance from the side to move's perspective, in pawns.
double material_score(const chess::Position& p, const EvalWeights& w);
// Material plus mobility and king-safety terms, side-to-move perspective.
double static_score(const chess::Position& p, const EvalWeights& w);

// Self-play-like profile: 2-ply negamax over static_score. Policy is a
// softmax of the 1-ply child scores at tau_strong.
class StrongEvaluator final : public Evaluator {
 public:
  explicit StrongEvaluator(EvalWeights w = {}) : w_(std::move(w)) {}
  std::string name() const override { return "strong"; }
  bool deterministic() const override { return true; }
  Evaluation evaluate(const chess::Position& p, std::span<const chess::Move> legal) override;
  const EvalWeights& weights() const { return w_; }

 private:
  EvalWeights w_;
};

// Human-like profile: material only, no lookahead, flat greedy policy that
// favours captures.
class WeakEvaluator final : public Evaluator {
 public:
  explicit WeakEvaluator(EvalWeights w = {}) : w_(std::move(w)) {}
  std::string name() const override { return "weak"; }
  bool deterministic() const override { return true; }
  Evaluation evaluate(const chess::Position& p, std::span<const chess::Move> legal) override;
  const EvalWeights& weights() const { return w_; }

 private:
  EvalWeights w_;
};

}  // namespace brilliant::search
