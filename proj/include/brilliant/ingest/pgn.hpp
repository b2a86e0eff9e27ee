#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brilliant/chess/position.hpp"

namespace brilliant::ingest {

struct Ply {
  chess::Position before;
  chess::Move move;
  std::string san;
  std::vector<int> nags;
  std::vector<std::string> suffixes;  // "!!", "!", "?", "??", "!?", "?!"
  std::vector<std::string> comments;
  int variation_depth = 0;  // 0 on the main line
};

struct GameRecord {
  std::vector<std::pair<std::string, std::string>> tags;  // file order
  std::vector<Ply> plies;  // document order, variations included
  std::optional<std::string> source_study_id;

  // Empty when absent.
  std::string tag(std::string_view key) const;
};

// Parses every game in `text`. Plies inside variations are included with
// their own positions. Throws ParseError naming the game index and token for
// unparseable movetext, IllegalMoveError naming the ply for illegal moves.
std::vector<GameRecord> parse_pgn(std::string_view text, std::optional<std::string> study_id = std::nullopt);

}  // namespace brilliant::ingest
