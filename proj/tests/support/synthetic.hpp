#pragma once

// Synthetic labeled moves with a known signal. A "brilliant" move is the
// strong evaluator's clear favourite whose payoff only shows two plies
// later: weak rates some other move higher and the 1-ply static score (the
// strong policy) prefers another move too, yet a strong search at
// `high_budget` ends up ranking it best. Controls are half "good" moves (the
// strong favourite, also rated top by weak, ranked best by the same search)
// and half "other" moves (a random move the strong evaluator does not
// prefer).

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "brilliant/chess/position.hpp"
#include "brilliant/ingest/dataset.hpp"
#include "brilliant/features/features.hpp"
#include "brilliant/search/builtin.hpp"
#include "brilliant/search/mcts.hpp"

namespace testsupport {

struct SyntheticOptions {
  std::size_t brilliant = 600;
  std::size_t controls = 600;
  std::uint64_t seed = 1;
  double strong_margin = 0.05;  // value units over the runner-up
  double weak_margin = 0.05;    // weak's favourite beats the brilliant move by this much
  std::uint64_t high_budget = 200;
  brilliant::search::SearchConfig search;
};

struct MoveScores {
  std::vector<brilliant::chess::Move> moves;
  std::vector<double> strong;  // mover-perspective value of the child
  std::vector<double> weak;
  std::vector<double> shallow;  // mover-perspective static score right after the move
};

inline MoveScores score_moves(const brilliant::chess::Position& p, brilliant::search::StrongEvaluator& strong,
                              brilliant::search::WeakEvaluator& weak) {
  using namespace brilliant;
  MoveScores s;
  s.moves = chess::legal_moves(p);
  for (const chess::Move& m : s.moves) {
    const chess::Position c = chess::apply_move(p, m);
    const auto legal = chess::legal_moves(c);
    if (legal.empty()) {
      const double v = c.in_check() ? 1.0 : 0.0;
      s.strong.push_back(v);
      s.weak.push_back(v);
      s.shallow.push_back(v * strong.weights().mate_score);
      continue;
    }
    s.shallow.push_back(-search::static_score(c, strong.weights()));
    s.strong.push_back(-strong.evaluate(c, legal).value);
    s.weak.push_back(-weak.evaluate(c, legal).value);
  }
  return s;
}

// True when a strong search at `budget` ranks `m` best among the root moves.
inline bool search_ranks_best(const brilliant::chess::Position& p, brilliant::chess::Move m,
                              brilliant::search::StrongEvaluator& strong, std::uint64_t budget,
                              const brilliant::search::SearchConfig& cfg) {
  using namespace brilliant;
  const search::SearchTree t = search::run_search(p, budget, strong, cfg);
  return features::tree_features(t, m)[features::kIsBest] == 1.0;
}

inline std::vector<brilliant::ingest::LabeledMove> synthetic_moves(const SyntheticOptions& o,
                                                                   std::size_t* scanned = nullptr) {
  using namespace brilliant;
  search::StrongEvaluator strong;
  search::WeakEvaluator weak;
  std::mt19937_64 rng(o.seed);
  std::vector<ingest::LabeledMove> out;
  std::size_t n_brilliant = 0, n_good = 0, n_other = 0;
  const std::size_t want_good = o.controls / 2;
  const std::size_t want_other = o.controls - want_good;
  std::size_t positions = 0;
  while (n_brilliant < o.brilliant || n_good < want_good || n_other < want_other) {
    chess::Position p = chess::Position::startpos();
    const int plies = 8 + static_cast<int>(rng() % 50);
    bool ok = true;
    for (int i = 0; i < plies && ok; ++i) {
      const auto legal = chess::legal_moves(p);
      if (legal.empty()) ok = false;
      else p = chess::apply_move_unchecked(p, legal[rng() % legal.size()]);
    }
    if (!ok || chess::status(p) != chess::GameStatus::Ongoing) continue;
    ++positions;
    const MoveScores s = score_moves(p, strong, weak);
    if (s.moves.size() < 2) continue;
    std::vector<std::size_t> order(s.moves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.strong[a] > s.strong[b]; });
    const std::size_t best = order[0];
    const bool clear = s.strong[best] - s.strong[order[1]] >= o.strong_margin;
    const double weak_top = *std::max_element(s.weak.begin(), s.weak.end());
    const double shallow_top = *std::max_element(s.shallow.begin(), s.shallow.end());
    const std::string id = "synthetic/" + std::to_string(positions);
    if (clear && s.weak[best] <= weak_top - o.weak_margin && s.shallow[best] < shallow_top) {
      if (n_brilliant < o.brilliant && search_ranks_best(p, s.moves[best], strong, o.high_budget, o.search)) {
        out.push_back({p, s.moves[best], ingest::Label::Brilliant, id, 1});
        ++n_brilliant;
      }
    } else if (clear && s.weak[best] >= weak_top) {
      if (n_good < want_good && search_ranks_best(p, s.moves[best], strong, o.high_budget, o.search)) {
        out.push_back({p, s.moves[best], ingest::Label::Good, id, 1});
        ++n_good;
      }
    } else if (n_other < want_other) {
      const std::size_t pick = order[1 + rng() % (order.size() - 1)];
      out.push_back({p, s.moves[pick], ingest::Label::Other, id, 1});
      ++n_other;
    }
  }
  if (scanned) *scanned = positions;
  return out;
}

}  // namespace testsupport
