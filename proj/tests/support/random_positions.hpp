#pragma once

#include <random>
#include <vector>

#include "brilliant/chess/position.hpp"

namespace testsupport {

// Non-terminal positions reached by uniform random playouts from startpos.
inline std::vector<brilliant::chess::Position> random_positions(std::size_t count, std::uint64_t seed,
                                                                int min_plies = 4, int max_plies = 60) {
  using namespace brilliant::chess;
  std::mt19937_64 rng(seed);
  std::vector<Position> out;
  while (out.size() < count) {
    Position p = Position::startpos();
    const int plies = min_plies + static_cast<int>(rng() % static_cast<std::uint64_t>(max_plies - min_plies + 1));
    bool ok = true;
    for (int i = 0; i < plies; ++i) {
      const auto moves = legal_moves(p);
      if (moves.empty()) {
        ok = false;
        break;
      }
      p = apply_move_unchecked(p, moves[rng() % moves.size()]);
    }
    if (ok && status(p) == GameStatus::Ongoing) out.push_back(p);
  }
  return out;
}

}  // namespace testsupport
