#include <algorithm>

#include "brilliant/chess/position.hpp"
#include "attacks.hpp"

namespace brilliant::chess {

namespace {

void add_pawn_move(std::vector<Move>& out, Square from, Square to) {
  const int r = rank_of(to);
  if (r == 0 || r == 7) {
    for (const auto k : {PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen})
      out.push_back(Move{from, to, k});
  } else {
    out.push_back(Move{from, to, PieceKind::None});
  }
}

void pseudo_legal(const Position& p, std::vector<Move>& out) {
  const Color us = p.side_to_move();
  const Color them = ~us;
  const int forward = us == Color::White ? 8 : -8;
  const int start_rank = us == Color::White ? 1 : 6;

  for (Square from = 0; from < 64; ++from) {
    const Piece pc = p.at(from);
    if (pc.empty() || pc.color() != us) continue;
    switch (pc.kind()) {
      case PieceKind::Pawn: {
        const int one = from + forward;
        if (p.at(static_cast<Square>(one)).empty()) {
          add_pawn_move(out, from, static_cast<Square>(one));
          const int two = one + forward;
          if (rank_of(from) == start_rank && p.at(static_cast<Square>(two)).empty())
            out.push_back(Move{from, static_cast<Square>(two), PieceKind::None});
        }
        for (const int df : {-1, 1}) {
          const int f = file_of(from) + df;
          if (f < 0 || f > 7) continue;
          const Square to = make_square(f, rank_of(static_cast<Square>(one)));
          const Piece target = p.at(to);
          if ((!target.empty() && target.color() == them) || to == p.en_passant()) add_pawn_move(out, from, to);
        }
        break;
      }
      case PieceKind::Knight:
      case PieceKind::King: {
        const auto& table = pc.kind() == PieceKind::Knight ? detail::kKnight : detail::kKing;
        for (int i = 0; i < table.count[from]; ++i) {
          const Square to = table.targets[from][i];
          const Piece target = p.at(to);
          if (target.empty() || target.color() == them) out.push_back(Move{from, to, PieceKind::None});
        }
        break;
      }
      default: {
        const int first = pc.kind() == PieceKind::Bishop ? 4 : 0;
        const int last = pc.kind() == PieceKind::Rook ? 4 : 8;
        for (int d = first; d < last; ++d) {
          for (int i = 0; i < detail::kRays.length[from][d]; ++i) {
            const Square to = detail::kRays.squares[from][d][i];
            const Piece target = p.at(to);
            if (target.empty()) {
              out.push_back(Move{from, to, PieceKind::None});
              continue;
            }
            if (target.color() == them) out.push_back(Move{from, to, PieceKind::None});
            break;
          }
        }
        break;
      }
    }
  }

  // Castling; path emptiness and attacked squares checked here, the final
  // king square is covered by the generic legality filter.
  const Square king = p.king_square(us);
  const Square home = us == Color::White ? 4 : 60;
  if (king != home || p.in_check()) return;
  const Piece rook(us, PieceKind::Rook);
  const std::uint8_t ks = us == Color::White ? kWhiteKingside : kBlackKingside;
  const std::uint8_t qs = us == Color::White ? kWhiteQueenside : kBlackQueenside;
  if ((p.castling() & ks) && p.at(home + 3) == rook && p.at(home + 1).empty() && p.at(home + 2).empty() &&
      !p.attacked(home + 1, them))
    out.push_back(Move{home, static_cast<Square>(home + 2), PieceKind::None});
  if ((p.castling() & qs) && p.at(home - 4) == rook && p.at(home - 1).empty() && p.at(home - 2).empty() &&
      p.at(home - 3).empty() && !p.attacked(home - 1, them))
    out.push_back(Move{home, static_cast<Square>(home - 2), PieceKind::None});
}

}  // namespace

std::vector<Move> legal_moves(const Position& p) {
  std::vector<Move> pseudo;
  pseudo.reserve(64);
  pseudo_legal(p, pseudo);
  std::vector<Move> legal;
  legal.reserve(pseudo.size());
  const Color us = p.side_to_move();
  for (const Move& m : pseudo) {
    const Position next = apply_move_unchecked(p, m);
    if (!next.attacked(next.king_square(us), ~us)) legal.push_back(m);
  }
  std::sort(legal.begin(), legal.end());
  return legal;
}

}  // namespace brilliant::chess
