#include <random>
#include <set>

#include <gtest/gtest.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/chess/position.hpp"
#include "brilliant/error.hpp"
#include "support/perft_oracle.hpp"
#include "support/perft_suite.hpp"

namespace brilliant::chess {
namespace {

std::vector<std::string> uci_list(const Position& p) {
  std::vector<std::string> out;
  for (const Move& m : legal_moves(p)) out.push_back(move_to_uci(m));
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Fn>
void expect_error_containing(Fn&& fn, const std::string& needle) {
  try {
    fn();
    FAIL() << "expected error containing '" << needle << "'";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Fen, StartposHas32PiecesWhiteToMove) {
  const Position p = parse_fen(kStartFen);
  int pieces = 0;
  for (Square s = 0; s < 64; ++s) pieces += !p.at(s).empty();
  EXPECT_EQ(pieces, 32);
  EXPECT_EQ(p.side_to_move(), Color::White);
  EXPECT_EQ(p.castling(), 0xF);
  EXPECT_EQ(p.en_passant(), kNoSquare);
}

TEST(Fen, MinimalTwoKingBoard) {
  const Position p = parse_fen("8/8/8/8/8/8/8/K6k w - - 0 1");
  EXPECT_EQ(p.king_square(Color::White), make_square(0, 0));
  EXPECT_EQ(p.king_square(Color::Black), make_square(7, 0));
}

TEST(Fen, ErrorsNameTheField) {
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/KK5k w - - 0 1"); }, "invariant: king count");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k w - - 0"); }, "field count");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6x w - - 0 1"); }, "illegal piece character");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k x - - 0 1"); }, "side to move");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k w Z - 0 1"); }, "castling");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k w - e4 0 1"); }, "en passant");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k w - - x 1"); }, "halfmove clock");
  expect_error_containing([] { parse_fen("8/8/8/8/8/8/8/K6k w - - 0 0"); }, "fullmove number");
  // Black in check with white to move.
  expect_error_containing([] { parse_fen("k7/8/8/8/8/8/8/R6K w - - 0 1"); }, "not to move is in check");
}

TEST(Fen, RoundTripOnSuite) {
  for (const auto& c : perft_suite::kCases) EXPECT_EQ(to_fen(parse_fen(c.fen)), c.fen) << c.name;
  EXPECT_EQ(to_fen(parse_fen("  8/8/8/8/8/8/8/K6k   w - -  0 1 ")), "8/8/8/8/8/8/8/K6k w - - 0 1");
}

TEST(MoveGen, CountsAndCanonicalOrder) {
  EXPECT_EQ(legal_moves(Position::startpos()).size(), 20u);
  EXPECT_EQ(legal_moves(parse_fen(perft_suite::kCases[1].fen)).size(), 48u);
  const auto moves = legal_moves(parse_fen(perft_suite::kCases[1].fen));
  EXPECT_TRUE(std::is_sorted(moves.begin(), moves.end()));
}

TEST(MoveGen, StalemateHasNoMoves) {
  const Position p = parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1");
  EXPECT_TRUE(legal_moves(p).empty());
  EXPECT_EQ(status(p), GameStatus::Stalemate);
  EXPECT_EQ(status(parse_fen("7k/6Q1/6K1/8/8/8/8/8 b - - 0 1")), GameStatus::Checkmate);
}

TEST(ApplyMove, DoublePushSetsEnPassant) {
  const Position p = apply_move(Position::startpos(), parse_uci("e2e4"));
  EXPECT_EQ(p.side_to_move(), Color::Black);
  EXPECT_EQ(square_name(p.en_passant()), "e3");
  EXPECT_EQ(to_fen(p), "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1");
}

TEST(ApplyMove, CastlingMovesKingAndRook) {
  const Position before = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1");
  const Position after = apply_move(before, parse_san(before, "O-O"));
  EXPECT_TRUE(after.at(make_square(6, 0)).is(Color::White, PieceKind::King));
  EXPECT_TRUE(after.at(make_square(5, 0)).is(Color::White, PieceKind::Rook));
  EXPECT_TRUE(after.at(make_square(7, 0)).empty());
  EXPECT_EQ(after.castling(), kBlackKingside | kBlackQueenside);
  EXPECT_EQ(after.halfmove_clock(), 1);
}

TEST(ApplyMove, IllegalMoveIsNamed) {
  expect_error_containing([] { apply_move(Position::startpos(), parse_uci("e2e5")); }, "e2e5");
}

TEST(Perft, StartposDepthFour) { EXPECT_EQ(perft(Position::startpos(), 4), 197281u); }

TEST(Perft, SuiteMatchesPublishedAndOracleToDepthThree) {
  for (const auto& c : perft_suite::kCases) {
    const Position p = parse_fen(c.fen);
    const auto ob = oracle::from_fen(c.fen);
    for (int d = 1; d <= 3; ++d) {
      const auto count = perft(p, d);
      if (c.published[d - 1]) EXPECT_EQ(count, c.published[d - 1]) << c.name << " depth " << d;
      EXPECT_EQ(count, oracle::perft(ob, d)) << c.name << " depth " << d;
    }
  }
}

// Set equality of move lists at every node down to depth 2.
void compare_sets(const Position& p, const oracle::Board& ob, int depth, const std::string& trail) {
  const auto mine = uci_list(p);
  ASSERT_EQ(mine, oracle::legal_moves(ob)) << trail << " " << to_fen(p);
  if (depth == 0) return;
  for (const auto& m : mine) compare_sets(apply_move(p, parse_uci(m)), oracle::make_move(ob, m), depth - 1, trail + " " + m);
}

TEST(Perft, MoveSetsMatchOracle) {
  for (const auto& c : perft_suite::kCases) compare_sets(parse_fen(c.fen), oracle::from_fen(c.fen), 1, std::string(c.name));
}

TEST(Properties, RandomPlayoutsKeepInvariantsAndRoundTrip) {
  std::mt19937_64 rng(7);
  for (int game = 0; game < 60; ++game) {
    Position p = Position::startpos();
    for (int ply = 0; ply < 80; ++ply) {
      const auto moves = legal_moves(p);
      if (moves.empty()) break;
      ASSERT_EQ(uci_list(p), oracle::legal_moves(oracle::from_fen(to_fen(p)))) << to_fen(p);
      for (const Move& m : moves) {
        EXPECT_EQ(parse_uci(move_to_uci(m)), m);
        EXPECT_EQ(parse_san(p, to_san(p, m)), m) << to_san(p, m) << " in " << to_fen(p);
      }
      p = apply_move(p, moves[rng() % moves.size()]);
      // parse_fen re-validates every Position invariant.
      const Position reparsed = parse_fen(to_fen(p));
      ASSERT_EQ(reparsed, p);
      ASSERT_EQ(reparsed.hash(), p.hash());
    }
  }
}

TEST(San, BasicAndDisambiguation) {
  const Position start = Position::startpos();
  EXPECT_EQ(move_to_uci(parse_san(start, "e4")), "e2e4");
  EXPECT_EQ(move_to_uci(parse_san(start, "Nf3!?")), "g1f3");
  const Position two_knights = parse_fen("4k3/8/8/8/8/5N2/8/1N2K3 w - - 0 1");
  EXPECT_EQ(move_to_uci(parse_san(two_knights, "Nbd2")), "b1d2");
  EXPECT_EQ(move_to_uci(parse_san(two_knights, "Nfd2")), "f3d2");
  expect_error_containing([&] { parse_san(two_knights, "Nd2"); }, "ambiguous SAN");
  expect_error_containing([&] { parse_san(start, "Ke2"); }, "no matching legal move");
  const Position promo = parse_fen("4k3/1P6/8/8/8/8/8/4K3 w - - 0 1");
  EXPECT_EQ(move_to_uci(parse_san(promo, "b8=Q+")), "b7b8q");
  EXPECT_EQ(move_to_uci(parse_san(promo, "b8N")), "b7b8n");
}

TEST(Uci, ParseErrors) {
  EXPECT_THROW(parse_uci("e2"), ParseError);
  EXPECT_THROW(parse_uci("e2e2"), ParseError);
  EXPECT_THROW(parse_uci("e7e8k"), ParseError);
  EXPECT_THROW(parse_uci_legal(Position::startpos(), "e2e5"), IllegalMoveError);
  EXPECT_EQ(move_to_uci(parse_uci("e7e8q")), "e7e8q");
}

}  // namespace
}  // namespace brilliant::chess
