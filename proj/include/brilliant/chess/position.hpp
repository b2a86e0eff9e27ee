#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brilliant/chess/types.hpp"

namespace brilliant::chess {

inline constexpr std::string_view kStartFen = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

// Castling right bits.
enum CastlingRight : std::uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
};

enum class GameStatus { Ongoing, Checkmate, Stalemate };

// Immutable game state. Construct through parse_fen() or startpos(); derive
// successors with apply_move().
class Position {
 public:
  static Position startpos();

  Piece at(Square s) const { return board_[s]; }
  Color side_to_move() const { return side_; }
  std::uint8_t castling() const { return castling_; }
  Square en_passant() const { return ep_; }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }
  Square king_square(Color c) const { return kings_[static_cast<int>(c)]; }

  bool in_check() const;
  bool attacked(Square s, Color by) const;

  // Zobrist hash over placement, side, castling and en passant.
  std::uint64_t hash() const;

  friend bool operator==(const Position&, const Position&) = default;

 private:
  friend Position parse_fen(std::string_view);
  friend Position apply_move_unchecked(const Position&, const Move&);
  friend class PositionBuilder;

  std::array<Piece, 64> board_{};
  std::array<Square, 2> kings_{kNoSquare, kNoSquare};
  Color side_ = Color::White;
  std::uint8_t castling_ = 0;
  Square ep_ = kNoSquare;
  int halfmove_ = 0;
  int fullmove_ = 1;
};

// Throws ParseError (malformed fields) or InvariantError; messages name the
// offending field.
Position parse_fen(std::string_view text);
std::string to_fen(const Position& p);

// Legal moves in canonical order: by from-square, to-square, promotion kind.
std::vector<Move> legal_moves(const Position& p);

// Throws IllegalMoveError if m is not legal in p.
Position apply_move(const Position& p, const Move& m);

// Caller guarantees legality; skips the membership check.
Position apply_move_unchecked(const Position& p, const Move& m);

GameStatus status(const Position& p);
bool is_capture(const Position& p, const Move& m);

// Number of leaf nodes at the given depth.
std::uint64_t perft(const Position& p, int depth);

// Free-form board assembly for generators and tests; build() validates via
// the FEN path so every invariant is enforced.
class PositionBuilder {
 public:
  PositionBuilder& put(Square s, Piece piece);
  PositionBuilder& side_to_move(Color c);
  PositionBuilder& castling(std::uint8_t rights);
  Position build() const;

 private:
  std::array<Piece, 64> board_{};
  Color side_ = Color::White;
  std::uint8_t castling_ = 0;
};

}  // namespace brilliant::chess
