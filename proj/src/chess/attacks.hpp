#pragma once

#include <array>
#include <cstdint>

#include "brilliant/chess/types.hpp"

namespace brilliant::chess::detail {

// Per-square target lists; count stored separately so the tables stay flat.
struct JumpTable {
  std::array<std::array<Square, 8>, 64> targets{};
  std::array<std::uint8_t, 64> count{};
};

// Rays in direction order N, S, E, W, NE, NW, SE, SW.
struct RayTable {
  std::array<std::array<std::array<Square, 7>, 8>, 64> squares{};
  std::array<std::array<std::uint8_t, 8>, 64> length{};
};

inline constexpr int kDirFile[8] = {0, 0, 1, -1, 1, -1, 1, -1};
inline constexpr int kDirRank[8] = {1, -1, 0, 0, 1, 1, -1, -1};

constexpr JumpTable make_jumps(const int (&df)[8], const int (&dr)[8]) {
  JumpTable t;
  for (int s = 0; s < 64; ++s) {
    for (int d = 0; d < 8; ++d) {
      const int f = (s & 7) + df[d];
      const int r = (s >> 3) + dr[d];
      if (f >= 0 && f < 8 && r >= 0 && r < 8) t.targets[s][t.count[s]++] = static_cast<Square>(r * 8 + f);
    }
  }
  return t;
}

constexpr RayTable make_rays() {
  RayTable t;
  for (int s = 0; s < 64; ++s) {
    for (int d = 0; d < 8; ++d) {
      int f = (s & 7) + kDirFile[d];
      int r = (s >> 3) + kDirRank[d];
      while (f >= 0 && f < 8 && r >= 0 && r < 8) {
        t.squares[s][d][t.length[s][d]++] = static_cast<Square>(r * 8 + f);
        f += kDirFile[d];
        r += kDirRank[d];
      }
    }
  }
  return t;
}

inline constexpr int kKnightFile[8] = {1, 2, 2, 1, -1, -2, -2, -1};
inline constexpr int kKnightRank[8] = {2, 1, -1, -2, -2, -1, 1, 2};

inline constexpr JumpTable kKnight = make_jumps(kKnightFile, kKnightRank);
inline constexpr JumpTable kKing = make_jumps(kDirFile, kDirRank);
inline constexpr RayTable kRays = make_rays();

inline bool square_attacked(const std::array<Piece, 64>& board, Square s, Color by) {
  // Pawns: a pawn of color `by` attacks s from one rank behind s.
  const int f = file_of(s);
  const int r = rank_of(s);
  const int pawn_rank = by == Color::White ? r - 1 : r + 1;
  if (pawn_rank >= 0 && pawn_rank < 8) {
    const Piece pawn(by, PieceKind::Pawn);
    if (f > 0 && board[make_square(f - 1, pawn_rank)] == pawn) return true;
    if (f < 7 && board[make_square(f + 1, pawn_rank)] == pawn) return true;
  }
  const Piece knight(by, PieceKind::Knight);
  for (int i = 0; i < kKnight.count[s]; ++i)
    if (board[kKnight.targets[s][i]] == knight) return true;
  const Piece king(by, PieceKind::King);
  for (int i = 0; i < kKing.count[s]; ++i)
    if (board[kKing.targets[s][i]] == king) return true;

  const Piece queen(by, PieceKind::Queen);
  for (int d = 0; d < 8; ++d) {
    const Piece slider(by, d < 4 ? PieceKind::Rook : PieceKind::Bishop);
    for (int i = 0; i < kRays.length[s][d]; ++i) {
      const Piece pc = board[kRays.squares[s][d][i]];
      if (pc.empty()) continue;
      if (pc == slider || pc == queen) return true;
      break;
    }
  }
  return false;
}

}  // namespace brilliant::chess::detail
