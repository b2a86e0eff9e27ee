#pragma once

#include <string>
#include <string_view>

#include "brilliant/chess/position.hpp"

namespace brilliant::chess {

// Resolves a SAN token against the legal moves of p. Trailing annotation
// suffixes (!, ?, +, #) are ignored. Throws IllegalMoveError with
// "no matching legal move" or "ambiguous SAN".
Move parse_san(const Position& p, std::string_view san);

std::string to_san(const Position& p, const Move& m);

// Long algebraic "e2e4" / "e7e8q".
std::string move_to_uci(const Move& m);

// Syntax only; legality is checked by apply_move. Throws ParseError.
Move parse_uci(std::string_view text);

// Syntax plus legality in p. Throws IllegalMoveError naming the move.
Move parse_uci_legal(const Position& p, std::string_view text);

}  // namespace brilliant::chess
