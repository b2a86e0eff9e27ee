#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "brilliant/chess/position.hpp"
#include "brilliant/search/evaluator.hpp"
#include "brilliant/search/tree.hpp"

namespace brilliant::search {

struct SearchConfig {
  double c_puct = 1.5;
  // Reserved for stochastic evaluators; the search itself draws no randomness.
  std::uint64_t seed = 0;
  // A search whose selection keeps landing on terminals makes no evaluator
  // calls; after this many consecutive such iterations it stops and the tree
  // is flagged exhausted.
  std::uint64_t max_idle_iterations = std::uint64_t{1} << 20;
};

// Hooks for tests and tracing. `path` is the move sequence from the root.
struct SearchObserver {
  std::function<void(std::span<const chess::Move> path)> on_expand;
  std::function<void(std::span<const chess::Move> path, Terminal kind)> on_terminal;
};

// PUCT search from `root` until exactly `budget` evaluator calls were made
// (the root evaluation is call 1), or fewer when the tree is exhausted (see
// max_idle_iterations; recorded in TreeMeta::exhausted). Throws DataError for a terminal root or a
// zero budget; evaluator errors propagate.
SearchTree run_search(const chess::Position& root, std::uint64_t budget, Evaluator& evaluator,
                      const SearchConfig& config = {}, const SearchObserver* observer = nullptr);

// One search up to the largest budget, snapshotting the tree whenever the
// call count reaches each budget. Equivalent to separate run_search calls per
// budget because selection is deterministic. Budgets must be ascending.
std::vector<SearchTree> run_search_ladder(const chess::Position& root, std::span<const std::uint64_t> budgets,
                                          Evaluator& evaluator, const SearchConfig& config = {});

// PUCT score of a child edge as seen from its parent.
inline double puct_score(double child_q_parent_view, double prior, std::uint32_t parent_visits,
                         std::uint32_t child_visits, double c_puct) {
  return child_q_parent_view + c_puct * prior * std::sqrt(static_cast<double>(parent_visits)) /
                                   (1.0 + static_cast<double>(child_visits));
}

}  // namespace brilliant::search
