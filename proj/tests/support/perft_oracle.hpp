#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Brute-force reference move generator. Shares no code with the library:
// its own FEN reader, a char board, and move legality decided by testing
// every (from, to) pair against geometric piece rules.
namespace oracle {

struct Board {
  char sq[64];  // '.' or FEN letter; index = rank * 8 + file
  bool white_to_move = true;
  bool castle[4] = {false, false, false, false};  // K Q k q
  int ep = -1;
};

Board from_fen(std::string_view fen);

// Legal moves as sorted UCI strings.
std::vector<std::string> legal_moves(const Board& b);
Board make_move(const Board& b, const std::string& uci);
std::uint64_t perft(const Board& b, int depth);

}  // namespace oracle
