#include "brilliant/ingest/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"
#include "brilliant/random.hpp"

namespace brilliant::ingest {

namespace {

constexpr std::uint64_t kCapStream = 0x5851f42d4c957f2dULL;

bool has(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

bool has(const std::vector<std::string>& v, std::string_view x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Text outside [%...] commands, trimmed.
bool is_plain_comment(std::string_view c) {
  int depth = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == '[' && i + 1 < c.size() && c[i + 1] == '%') {
      ++depth;
      ++i;
    } else if (c[i] == ']' && depth > 0) {
      --depth;
    } else if (depth == 0 && !std::isspace(static_cast<unsigned char>(c[i]))) {
      return true;
    }
  }
  return false;
}

void count(ClassCounts& c, Label l) {
  switch (l) {
    case Label::Brilliant:
      ++c.brilliant;
      break;
    case Label::Good:
      ++c.good;
      break;
    case Label::Other:
      ++c.other;
      break;
  }
}

}  // namespace

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Brilliant:
      return "brilliant";
    case Label::Good:
      return "good";
    case Label::Other:
      return "other";
  }
  return "other";
}

Label parse_label(std::string_view name) {
  if (name == "brilliant") return Label::Brilliant;
  if (name == "good") return Label::Good;
  if (name == "other") return Label::Other;
  throw ParseError(fmt::format("unknown label '{}'", name));
}

nlohmann::json LabeledMove::to_json() const {
  nlohmann::json j;
  j["fen"] = chess::to_fen(position);
  j["uci"] = chess::move_to_uci(move);
  j["label"] = label_name(label);
  j["game_id"] = game_id;
  j["ply"] = ply;
  return j;
}

LabeledMove LabeledMove::from_json(const nlohmann::json& j) {
  LabeledMove m;
  try {
    m.position = chess::parse_fen(j.at("fen").get<std::string>());
    m.move = chess::parse_uci_legal(m.position, j.at("uci").get<std::string>());
    m.label = parse_label(j.at("label").get<std::string>());
    m.game_id = j.at("game_id").get<std::string>();
    m.ply = j.at("ply").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("labeled move: ") + e.what());
  }
  return m;
}

PlyClass classify_ply(const Ply& p) {
  if (has(p.nags, 2) || has(p.nags, 4) || has(p.nags, 6) || has(p.suffixes, "?") || has(p.suffixes, "??") ||
      has(p.suffixes, "?!"))
    return PlyClass::Excluded;
  if (has(p.nags, 3) || has(p.suffixes, "!!")) return PlyClass::Brilliant;
  if (has(p.nags, 1) || has(p.suffixes, "!")) return PlyClass::Good;
  const bool commented = std::any_of(p.comments.begin(), p.comments.end(), is_plain_comment);
  if (!p.nags.empty() || !p.suffixes.empty() || commented) return PlyClass::Other;
  return PlyClass::Unannotated;
}

nlohmann::json LabelCounts::to_json() const {
  return {{"brilliant", brilliant}, {"good", good}, {"other", other}, {"excluded", excluded},
          {"unannotated", unannotated}};
}

std::vector<LabeledMove> extract_labeled_moves(const GameRecord& g, const std::string& game_id,
                                               LabelCounts* counts) {
  std::vector<LabeledMove> out;
  LabelCounts local;
  for (std::size_t i = 0; i < g.plies.size(); ++i) {
    const Ply& p = g.plies[i];
    const PlyClass c = classify_ply(p);
    Label label;
    switch (c) {
      case PlyClass::Brilliant:
        ++local.brilliant;
        label = Label::Brilliant;
        break;
      case PlyClass::Good:
        ++local.good;
        label = Label::Good;
        break;
      case PlyClass::Other:
        ++local.other;
        label = Label::Other;
        break;
      case PlyClass::Excluded:
        ++local.excluded;
        continue;
      case PlyClass::Unannotated:
        ++local.unannotated;
        continue;
    }
    out.push_back({p.before, p.move, label, game_id, static_cast<int>(i) + 1});
  }
  if (counts) {
    counts->brilliant += local.brilliant;
    counts->good += local.good;
    counts->other += local.other;
    counts->excluded += local.excluded;
    counts->unannotated += local.unannotated;
  }
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<LabeledMove>& moves) {
  for (const LabeledMove& m : moves) out << m.to_json().dump() << '\n';
}

std::vector<LabeledMove> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  std::vector<LabeledMove> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(LabeledMove::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), n, e.what()));
    } catch (const Error& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

nlohmann::json ClassCounts::to_json() const {
  return {{"brilliant", brilliant}, {"good", good}, {"other", other}, {"total", total()}};
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["other_cap"] = other_cap ? nlohmann::json(*other_cap) : nlohmann::json(nullptr);
  j["train"] = train;
  j["test"] = test;
  j["counts"] = {{"train", train_counts.to_json()}, {"test", test_counts.to_json()}};
  return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("other_cap").is_null()) m.other_cap = j.at("other_cap").get<std::size_t>();
    m.train = j.at("train").get<std::vector<std::size_t>>();
    m.test = j.at("test").get<std::vector<std::size_t>>();
    const auto read = [](const nlohmann::json& c) {
      return ClassCounts{c.at("brilliant").get<std::size_t>(), c.at("good").get<std::size_t>(),
                         c.at("other").get<std::size_t>()};
    };
    m.train_counts = read(j.at("counts").at("train"));
    m.test_counts = read(j.at("counts").at("test"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset manifest: ") + e.what());
  }
  return m;
}

DatasetManifest build_dataset(const std::vector<LabeledMove>& moves, std::uint64_t seed,
                              std::optional<std::size_t> other_cap) {
  if (moves.empty()) throw DataError("cannot build a dataset from zero labeled moves");
  DatasetManifest m;
  m.seed = seed;
  m.other_cap = other_cap;

  std::vector<std::size_t> kept;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < moves.size(); ++i) (moves[i].label == Label::Other ? others : kept).push_back(i);
  if (other_cap && others.size() > *other_cap) {
    const auto order = shuffled_indices(others.size(), seed ^ kCapStream);
    for (std::size_t k = 0; k < *other_cap; ++k) kept.push_back(others[order[k]]);
  } else {
    kept.insert(kept.end(), others.begin(), others.end());
  }
  std::sort(kept.begin(), kept.end());

  const std::size_t n_test = kept.size() / 10;
  const auto order = shuffled_indices(kept.size(), seed);
  for (std::size_t k = 0; k < kept.size(); ++k) (k < n_test ? m.test : m.train).push_back(kept[order[k]]);
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.test.begin(), m.test.end());
  for (const std::size_t i : m.train) count(m.train_counts, moves[i].label);
  for (const std::size_t i : m.test) count(m.test_counts, moves[i].label);
  return m;
}

}  // namespace brilliant::ingest
