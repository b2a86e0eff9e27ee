#include "brilliant/chess/position.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include <fmt/format.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"
#include "attacks.hpp"

namespace brilliant::chess {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct ZobristTables {
  std::array<std::array<std::uint64_t, 64>, 16> piece{};
  std::array<std::uint64_t, 16> castling{};
  std::array<std::uint64_t, 8> ep_file{};
  std::uint64_t black = 0;
};

constexpr ZobristTables make_zobrist() {
  ZobristTables z;
  std::uint64_t state = 0x42726c6c69616e74ULL;
  for (auto& row : z.piece)
    for (auto& v : row) v = splitmix(state);
  for (auto& v : z.castling) v = splitmix(state);
  for (auto& v : z.ep_file) v = splitmix(state);
  z.black = splitmix(state);
  return z;
}

constexpr ZobristTables kZobrist = make_zobrist();

void validate(const Position& p) {
  int white_kings = 0;
  int black_kings = 0;
  for (Square s = 0; s < 64; ++s) {
    const Piece pc = p.at(s);
    if (pc.kind() == PieceKind::King) (pc.color() == Color::White ? white_kings : black_kings)++;
    if (pc.kind() == PieceKind::Pawn && (rank_of(s) == 0 || rank_of(s) == 7))
      throw InvariantError(fmt::format("invariant: pawn on back rank ({})", square_name(s)));
  }
  if (white_kings != 1 || black_kings != 1) throw InvariantError("invariant: king count");
  if (p.en_passant() != kNoSquare) {
    const int expected_rank = p.side_to_move() == Color::White ? 5 : 2;
    if (rank_of(p.en_passant()) != expected_rank || !p.at(p.en_passant()).empty())
      throw InvariantError("invariant: en passant square");
  }
  const Color idle = ~p.side_to_move();
  if (p.attacked(p.king_square(idle), p.side_to_move()))
    throw InvariantError("invariant: side not to move is in check");
}

int parse_counter(std::string_view text, const char* field, int minimum) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < minimum)
    throw ParseError(fmt::format("FEN {}: '{}'", field, text));
  return value;
}

}  // namespace

char Piece::to_char() const {
  static constexpr char kChars[] = ".PNBRQK";
  const char c = kChars[static_cast<int>(kind())];
  return color() == Color::Black ? static_cast<char>(c - 'A' + 'a') : c;
}

std::optional<Piece> Piece::from_char(char ch) {
  const Color color = (ch >= 'a' && ch <= 'z') ? Color::Black : Color::White;
  switch (ch) {
    case 'P': case 'p': return Piece(color, PieceKind::Pawn);
    case 'N': case 'n': return Piece(color, PieceKind::Knight);
    case 'B': case 'b': return Piece(color, PieceKind::Bishop);
    case 'R': case 'r': return Piece(color, PieceKind::Rook);
    case 'Q': case 'q': return Piece(color, PieceKind::Queen);
    case 'K': case 'k': return Piece(color, PieceKind::King);
    default: return std::nullopt;
  }
}

std::string square_name(Square s) {
  if (s >= 64) return "-";
  return {static_cast<char>('a' + file_of(s)), static_cast<char>('1' + rank_of(s))};
}

std::optional<Square> parse_square(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const int f = text[0] - 'a';
  const int r = text[1] - '1';
  if (f < 0 || f > 7 || r < 0 || r > 7) return std::nullopt;
  return make_square(f, r);
}

Position Position::startpos() { return parse_fen(kStartFen); }

bool Position::attacked(Square s, Color by) const {
  return detail::square_attacked(board_, s, by);
}

bool Position::in_check() const { return attacked(king_square(side_), ~side_); }

std::uint64_t Position::hash() const {
  std::uint64_t h = 0;
  for (Square s = 0; s < 64; ++s)
    if (!board_[s].empty()) h ^= kZobrist.piece[board_[s].code()][s];
  h ^= kZobrist.castling[castling_];
  if (ep_ != kNoSquare) h ^= kZobrist.ep_file[file_of(ep_)];
  if (side_ == Color::Black) h ^= kZobrist.black;
  return h;
}

Position parse_fen(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) fields.push_back(text.substr(i, j - i));
    i = j;
  }
  // Four-field FEN (no counters) is common in EPD-derived data.
  if (fields.size() != 6 && fields.size() != 4)
    throw ParseError(fmt::format("FEN field count: expected 6, got {}", fields.size()));

  Position p;
  int rank = 7;
  int file = 0;
  for (const char ch : fields[0]) {
    if (ch == '/') {
      if (file != 8 || rank == 0) throw ParseError("FEN piece placement: bad rank layout");
      --rank;
      file = 0;
    } else if (ch >= '1' && ch <= '8') {
      file += ch - '0';
      if (file > 8) throw ParseError("FEN piece placement: rank overflow");
    } else {
      const auto piece = Piece::from_char(ch);
      if (!piece) throw ParseError(fmt::format("FEN piece placement: illegal piece character '{}'", ch));
      if (file > 7) throw ParseError("FEN piece placement: rank overflow");
      const Square s = make_square(file, rank);
      p.board_[s] = *piece;
      if (piece->kind() == PieceKind::King) p.kings_[static_cast<int>(piece->color())] = s;
      ++file;
    }
  }
  if (rank != 0 || file != 8) throw ParseError("FEN piece placement: wrong number of squares");

  if (fields[1] == "w") {
    p.side_ = Color::White;
  } else if (fields[1] == "b") {
    p.side_ = Color::Black;
  } else {
    throw ParseError(fmt::format("FEN side to move: '{}'", fields[1]));
  }

  if (fields[2] != "-") {
    for (const char ch : fields[2]) {
      std::uint8_t bit = 0;
      switch (ch) {
        case 'K': bit = kWhiteKingside; break;
        case 'Q': bit = kWhiteQueenside; break;
        case 'k': bit = kBlackKingside; break;
        case 'q': bit = kBlackQueenside; break;
        default: throw ParseError(fmt::format("FEN castling: illegal character '{}'", ch));
      }
      if (p.castling_ & bit) throw ParseError("FEN castling: repeated right");
      p.castling_ |= bit;
    }
  }

  if (fields[3] != "-") {
    const auto sq = parse_square(fields[3]);
    if (!sq) throw ParseError(fmt::format("FEN en passant: '{}'", fields[3]));
    p.ep_ = *sq;
  }

  if (fields.size() == 6) {
    p.halfmove_ = parse_counter(fields[4], "halfmove clock", 0);
    p.fullmove_ = parse_counter(fields[5], "fullmove number", 1);
  }

  // King squares stay kNoSquare on a missing king; validate() reports it
  // before anything dereferences them.
  int kings = 0;
  for (const Piece pc : p.board_)
    if (pc.kind() == PieceKind::King) ++kings;
  if (kings != 2 || p.kings_[0] == kNoSquare || p.kings_[1] == kNoSquare)
    throw InvariantError("invariant: king count");
  validate(p);
  return p;
}

std::string to_fen(const Position& p) {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const Piece pc = p.at(make_square(file, rank));
      if (pc.empty()) {
        ++empty;
        continue;
      }
      if (empty) out += static_cast<char>('0' + empty);
      empty = 0;
      out += pc.to_char();
    }
    if (empty) out += static_cast<char>('0' + empty);
    if (rank) out += '/';
  }
  out += p.side_to_move() == Color::White ? " w " : " b ";
  const auto rights = p.castling();
  if (!rights) out += '-';
  if (rights & kWhiteKingside) out += 'K';
  if (rights & kWhiteQueenside) out += 'Q';
  if (rights & kBlackKingside) out += 'k';
  if (rights & kBlackQueenside) out += 'q';
  out += ' ';
  out += p.en_passant() == kNoSquare ? std::string("-") : square_name(p.en_passant());
  out += fmt::format(" {} {}", p.halfmove_clock(), p.fullmove_number());
  return out;
}

Position apply_move_unchecked(const Position& p, const Move& m) {
  Position next = p;
  const Piece moving = p.board_[m.from];
  const Piece captured = p.board_[m.to];
  const Color us = p.side_;

  next.board_[m.from] = Piece();
  next.board_[m.to] = m.promotion != PieceKind::None ? Piece(us, m.promotion) : moving;
  next.ep_ = kNoSquare;

  bool reset_clock = !captured.empty();
  if (moving.kind() == PieceKind::Pawn) {
    reset_clock = true;
    if (m.to == p.ep_) {
      const Square victim = us == Color::White ? m.to - 8 : m.to + 8;
      next.board_[victim] = Piece();
    }
    if (std::abs(int(m.to) - int(m.from)) == 16) next.ep_ = static_cast<Square>((m.to + m.from) / 2);
  } else if (moving.kind() == PieceKind::King) {
    next.kings_[static_cast<int>(us)] = m.to;
    if (std::abs(int(m.to) - int(m.from)) == 2) {
      const bool kingside = m.to > m.from;
      const Square rook_from = kingside ? m.from + 3 : m.from - 4;
      const Square rook_to = kingside ? m.from + 1 : m.from - 1;
      next.board_[rook_to] = next.board_[rook_from];
      next.board_[rook_from] = Piece();
    }
    next.castling_ &= us == Color::White ? ~(kWhiteKingside | kWhiteQueenside) & 0xF
                                         : ~(kBlackKingside | kBlackQueenside) & 0xF;
  }
  // Any move touching a rook's home corner clears that right.
  for (const Square s : {m.from, m.to}) {
    if (s == 0) next.castling_ &= ~kWhiteQueenside;
    if (s == 7) next.castling_ &= ~kWhiteKingside;
    if (s == 56) next.castling_ &= ~kBlackQueenside;
    if (s == 63) next.castling_ &= ~kBlackKingside;
  }

  next.halfmove_ = reset_clock ? 0 : p.halfmove_ + 1;
  if (us == Color::Black) ++next.fullmove_;
  next.side_ = ~us;
  return next;
}

Position apply_move(const Position& p, const Move& m) {
  const auto moves = legal_moves(p);
  if (!std::binary_search(moves.begin(), moves.end(), m))
    throw IllegalMoveError(fmt::format("illegal move {} in {}", move_to_uci(m), to_fen(p)));
  return apply_move_unchecked(p, m);
}

bool is_capture(const Position& p, const Move& m) {
  if (!p.at(m.to).empty()) return true;
  return p.at(m.from).kind() == PieceKind::Pawn && m.to == p.en_passant();
}

GameStatus status(const Position& p) {
  if (!legal_moves(p).empty()) return GameStatus::Ongoing;
  return p.in_check() ? GameStatus::Checkmate : GameStatus::Stalemate;
}

std::uint64_t perft(const Position& p, int depth) {
  if (depth <= 0) return 1;
  const auto moves = legal_moves(p);
  if (depth == 1) return moves.size();
  std::uint64_t total = 0;
  for (const Move& m : moves) total += perft(apply_move_unchecked(p, m), depth - 1);
  return total;
}

PositionBuilder& PositionBuilder::put(Square s, Piece piece) {
  board_[s] = piece;
  return *this;
}

PositionBuilder& PositionBuilder::side_to_move(Color c) {
  side_ = c;
  return *this;
}

PositionBuilder& PositionBuilder::castling(std::uint8_t rights) {
  castling_ = rights;
  return *this;
}

Position PositionBuilder::build() const {
  Position p;
  p.board_ = board_;
  p.side_ = side_;
  p.castling_ = castling_;
  int kings = 0;
  for (Square s = 0; s < 64; ++s) {
    if (board_[s].kind() == PieceKind::King) {
      p.kings_[static_cast<int>(board_[s].color())] = s;
      ++kings;
    }
  }
  if (kings != 2 || p.kings_[0] == kNoSquare || p.kings_[1] == kNoSquare)
    throw InvariantError("invariant: king count");
  validate(p);
  return p;
}

}  // namespace brilliant::chess
