#include "brilliant/ingest/pgn.hpp"

#include <cctype>

#include <fmt/format.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"

namespace brilliant::ingest {

std::string GameRecord::tag(std::string_view key) const {
  for (const auto& [k, v] : tags)
    if (k == key) return v;
  return {};
}

namespace {

bool is_result(std::string_view t) { return t == "1-0" || t == "0-1" || t == "1/2-1/2" || t == "*"; }

bool is_suffix(std::string_view t) {
  return t == "!!" || t == "!" || t == "?" || t == "??" || t == "!?" || t == "?!";
}

bool is_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '{' || c == '}' || c == '(' || c == ')' || c == ';' ||
         c == '$' || c == '[' || c == ']';
}

struct Level {
  chess::Position cur;
  chess::Position before_last;
  int last_ply = -1;
};

class Parser {
 public:
  Parser(std::string_view text, std::optional<std::string> study) : s_(text), study_(std::move(study)) {}

  std::vector<GameRecord> run() {
    while (true) {
      skip_space();
      if (i_ >= s_.size()) break;
      const char c = s_[i_];
      if (c == '%' && (i_ == 0 || s_[i_ - 1] == '\n')) {
        skip_line();
      } else if (c == '[' && levels_.size() <= 1) {
        if (!levels_.empty()) finish();
        read_tag();
      } else {
        movetext_token();
      }
    }
    if (open_) finish();
    return std::move(games_);
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  std::optional<std::string> study_;
  std::vector<GameRecord> games_;
  GameRecord game_;
  bool open_ = false;
  std::vector<Level> levels_;

  int game_number() const { return static_cast<int>(games_.size()) + 1; }

  [[noreturn]] void fail(std::string_view token) const {
    throw ParseError(fmt::format("game {}: unparseable token '{}'", game_number(), token));
  }

  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  void skip_line() {
    while (i_ < s_.size() && s_[i_] != '\n') ++i_;
  }

  void open() {
    if (open_) return;
    game_ = GameRecord{};
    game_.source_study_id = study_;
    open_ = true;
  }

  void finish() {
    if (levels_.size() > 1) fail("(");
    games_.push_back(std::move(game_));
    game_ = GameRecord{};
    open_ = false;
    levels_.clear();
  }

  void read_tag() {
    open();
    const std::size_t start = i_;
    ++i_;
    skip_space();
    std::string key;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '"' && s_[i_] != ']')
      key += s_[i_++];
    skip_space();
    if (key.empty() || i_ >= s_.size() || s_[i_] != '"') fail(s_.substr(start, std::min<std::size_t>(40, s_.size() - start)));
    ++i_;
    std::string value;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
      value += s_[i_++];
    }
    ++i_;
    skip_space();
    if (i_ >= s_.size() || s_[i_] != ']') fail(s_.substr(start, std::min<std::size_t>(40, s_.size() - start)));
    ++i_;
    game_.tags.emplace_back(std::move(key), std::move(value));
  }

  void start_movetext() {
    open();
    if (!levels_.empty()) return;
    const std::string fen = game_.tag("FEN");
    Level l;
    try {
      l.cur = fen.empty() ? chess::Position::startpos() : chess::parse_fen(fen);
    } catch (const Error& e) {
      throw ParseError(fmt::format("game {}: bad FEN tag: {}", game_number(), e.what()));
    }
    levels_.push_back(l);
  }

  Ply* last_ply() {
    const int idx = levels_.back().last_ply;
    return idx < 0 ? nullptr : &game_.plies[static_cast<std::size_t>(idx)];
  }

  void annotate_comment(std::string text) {
    if (Ply* p = last_ply()) p->comments.push_back(std::move(text));
  }

  void movetext_token() {
    start_movetext();
    const char c = s_[i_];
    if (c == '{') {
      const std::size_t end = s_.find('}', i_);
      if (end == std::string_view::npos) fail("{");
      annotate_comment(std::string(s_.substr(i_ + 1, end - i_ - 1)));
      i_ = end + 1;
      return;
    }
    if (c == ';') {
      const std::size_t start = i_ + 1;
      skip_line();
      annotate_comment(std::string(s_.substr(start, i_ - start)));
      return;
    }
    if (c == '(') {
      ++i_;
      if (levels_.back().last_ply < 0) fail("(");
      Level l;
      l.cur = levels_.back().before_last;
      levels_.push_back(l);
      return;
    }
    if (c == ')') {
      ++i_;
      if (levels_.size() < 2) fail(")");
      levels_.pop_back();
      return;
    }
    if (c == '$') {
      std::size_t j = i_ + 1;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      const std::string_view tok = s_.substr(i_, j - i_);
      Ply* p = last_ply();
      if (tok.size() < 2 || !p) fail(tok);
      p->nags.push_back(std::stoi(std::string(tok.substr(1))));
      i_ = j;
      return;
    }
    std::size_t j = i_;
    while (j < s_.size() && !is_delimiter(s_[j])) ++j;
    std::string_view tok = s_.substr(i_, j - i_);
    if (tok.empty()) fail(s_.substr(i_, 1));
    i_ = j;

    if (is_result(tok)) {
      finish();
      return;
    }
    if (is_suffix(tok)) {
      Ply* p = last_ply();
      if (!p) fail(tok);
      p->suffixes.emplace_back(tok);
      return;
    }
    // Move numbers, possibly glued to the move: "12." "12..." "12...Nf3".
    if (std::isdigit(static_cast<unsigned char>(tok[0])) && tok.substr(0, 3) != "0-0") {
      std::size_t k = 0;
      while (k < tok.size() && std::isdigit(static_cast<unsigned char>(tok[k]))) ++k;
      while (k < tok.size() && tok[k] == '.') ++k;
      tok = tok.substr(k);
      if (tok.empty()) return;
    }
    play(tok);
  }

  void play(std::string_view tok) {
    std::size_t core = tok.size();
    while (core > 0 && (tok[core - 1] == '!' || tok[core - 1] == '?')) --core;
    const std::string_view san = tok.substr(0, core);
    const std::string_view suffix = tok.substr(core);
    if (san.empty() || (!suffix.empty() && !is_suffix(suffix)) ||
        std::string_view("KQRBNOabcdefgh0").find(san[0]) == std::string_view::npos)
      fail(tok);
    Level& l = levels_.back();
    const int ply_number = static_cast<int>(game_.plies.size()) + 1;
    chess::Move m;
    try {
      m = chess::parse_san(l.cur, san);
    } catch (const IllegalMoveError& e) {
      throw IllegalMoveError(fmt::format("game {}, ply {}: illegal move '{}' ({})", game_number(), ply_number, san,
                                         e.what()));
    } catch (const ParseError&) {
      fail(tok);
    }
    Ply p;
    p.before = l.cur;
    p.move = m;
    p.san = std::string(san);
    if (!suffix.empty()) p.suffixes.emplace_back(suffix);
    p.variation_depth = static_cast<int>(levels_.size()) - 1;
    game_.plies.push_back(std::move(p));
    l.before_last = l.cur;
    l.cur = chess::apply_move_unchecked(l.cur, m);
    l.last_ply = static_cast<int>(game_.plies.size()) - 1;
  }
};

}  // namespace

std::vector<GameRecord> parse_pgn(std::string_view text, std::optional<std::string> study_id) {
  return Parser(text, std::move(study_id)).run();
}

}  // namespace brilliant::ingest
