#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/chess/position.hpp"
#include "brilliant/ingest/pgn.hpp"

namespace brilliant::ingest {

enum class Label { Brilliant, Good, Other };

std::string_view label_name(Label l);
// Throws ParseError for an unknown name.
Label parse_label(std::string_view name);

struct LabeledMove {
  chess::Position position;
  chess::Move move;
  Label label = Label::Other;
  std::string game_id;
  int ply = 0;  // 1-based index into the game's plies

  nlohmann::json to_json() const;
  static LabeledMove from_json(const nlohmann::json& j);
};

enum class PlyClass { Brilliant, Good, Other, Excluded, Unannotated };

// Bad marks (NAG 2/4/6, "?", "??", "?!") exclude the ply; then NAG 3 or "!!"
// is brilliant, NAG 1 or "!" good, and any other annotation other. Comments
// made only of [%...] commands are not annotations.
PlyClass classify_ply(const Ply& p);

struct LabelCounts {
  std::size_t brilliant = 0;
  std::size_t good = 0;
  std::size_t other = 0;
  std::size_t excluded = 0;
  std::size_t unannotated = 0;
  nlohmann::json to_json() const;
};

std::vector<LabeledMove> extract_labeled_moves(const GameRecord& g, const std::string& game_id,
                                               LabelCounts* counts = nullptr);

// One JSON object per line with keys fen, uci, label, game_id, ply.
void write_jsonl(std::ostream& out, const std::vector<LabeledMove>& moves);
std::vector<LabeledMove> read_jsonl(const std::filesystem::path& path);

struct ClassCounts {
  std::size_t brilliant = 0;
  std::size_t good = 0;
  std::size_t other = 0;
  std::size_t total() const { return brilliant + good + other; }
  nlohmann::json to_json() const;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::optional<std::size_t> other_cap;
  std::vector<std::size_t> train;  // indices into the move list, ascending
  std::vector<std::size_t> test;
  ClassCounts train_counts;
  ClassCounts test_counts;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

// Optionally subsamples "other" to other_cap, then holds out floor(10%) of
// the remaining entries as the test split. Throws DataError for no moves.
DatasetManifest build_dataset(const std::vector<LabeledMove>& moves, std::uint64_t seed,
                              std::optional<std::size_t> other_cap = std::nullopt);

}  // namespace brilliant::ingest
