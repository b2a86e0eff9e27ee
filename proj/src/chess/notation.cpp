#include "brilliant/chess/notation.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "brilliant/error.hpp"

namespace brilliant::chess {

namespace {

PieceKind kind_from_letter(char ch) {
  switch (ch) {
    case 'N': return PieceKind::Knight;
    case 'B': return PieceKind::Bishop;
    case 'R': return PieceKind::Rook;
    case 'Q': return PieceKind::Queen;
    case 'K': return PieceKind::King;
    default: return PieceKind::None;
  }
}

char letter(PieceKind k) {
  static constexpr char kLetters[] = " PNBRQK";
  return kLetters[static_cast<int>(k)];
}

bool is_castle(const Position& p, const Move& m) {
  return p.at(m.from).kind() == PieceKind::King && std::abs(int(m.to) - int(m.from)) == 2;
}

}  // namespace

std::string move_to_uci(const Move& m) {
  std::string out = square_name(m.from) + square_name(m.to);
  if (m.promotion != PieceKind::None) out += static_cast<char>(letter(m.promotion) - 'A' + 'a');
  return out;
}

Move parse_uci(std::string_view text) {
  if (text.size() != 4 && text.size() != 5) throw ParseError(fmt::format("UCI move: '{}'", text));
  const auto from = parse_square(text.substr(0, 2));
  const auto to = parse_square(text.substr(2, 2));
  if (!from || !to || *from == *to) throw ParseError(fmt::format("UCI move: '{}'", text));
  Move m{*from, *to, PieceKind::None};
  if (text.size() == 5) {
    const char up = static_cast<char>(text[4] >= 'a' ? text[4] - 'a' + 'A' : text[4]);
    m.promotion = kind_from_letter(up);
    if (m.promotion == PieceKind::None || m.promotion == PieceKind::King)
      throw ParseError(fmt::format("UCI move: bad promotion in '{}'", text));
  }
  return m;
}

Move parse_uci_legal(const Position& p, std::string_view text) {
  Move m;
  try {
    m = parse_uci(text);
  } catch (const ParseError&) {
    throw IllegalMoveError(fmt::format("illegal move '{}'", text));
  }
  const auto moves = legal_moves(p);
  if (!std::binary_search(moves.begin(), moves.end(), m))
    throw IllegalMoveError(fmt::format("illegal move '{}' in {}", text, to_fen(p)));
  return m;
}

Move parse_san(const Position& p, std::string_view san) {
  std::string token(san);
  while (!token.empty() && (token.back() == '!' || token.back() == '?' || token.back() == '+' ||
                            token.back() == '#'))
    token.pop_back();
  if (token.empty()) throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));

  const auto moves = legal_moves(p);
  const Color us = p.side_to_move();

  if (token == "O-O" || token == "0-0" || token == "O-O-O" || token == "0-0-0") {
    const bool kingside = token.size() == 3;
    for (const Move& m : moves)
      if (is_castle(p, m) && (m.to > m.from) == kingside) return m;
    throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));
  }

  PieceKind piece = PieceKind::Pawn;
  std::size_t pos = 0;
  if (const PieceKind k = kind_from_letter(token[0]); k != PieceKind::None) {
    piece = k;
    pos = 1;
  }

  PieceKind promotion = PieceKind::None;
  if (piece == PieceKind::Pawn) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) {
      if (eq + 1 >= token.size()) throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));
      promotion = kind_from_letter(token[eq + 1]);
      token.resize(eq);
    } else if (token.size() >= 3 && kind_from_letter(token.back()) != PieceKind::None &&
               std::isdigit(static_cast<unsigned char>(token[token.size() - 2]))) {
      promotion = kind_from_letter(token.back());
      token.pop_back();
    }
  }

  if (token.size() < pos + 2) throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));
  const auto to = parse_square(std::string_view(token).substr(token.size() - 2));
  if (!to) throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));

  int from_file = -1;
  int from_rank = -1;
  for (std::size_t i = pos; i + 2 < token.size(); ++i) {
    const char ch = token[i];
    if (ch >= 'a' && ch <= 'h') from_file = ch - 'a';
    else if (ch >= '1' && ch <= '8') from_rank = ch - '1';
    else if (ch != 'x' && ch != '-' && ch != ':')
      throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));
  }

  const Move* found = nullptr;
  int matches = 0;
  for (const Move& m : moves) {
    if (m.to != *to || m.promotion != promotion) continue;
    const Piece pc = p.at(m.from);
    if (pc.kind() != piece || pc.color() != us) continue;
    if (piece == PieceKind::King && is_castle(p, m)) continue;
    if (from_file >= 0 && file_of(m.from) != from_file) continue;
    if (from_rank >= 0 && rank_of(m.from) != from_rank) continue;
    found = &m;
    ++matches;
  }
  if (matches == 0) throw IllegalMoveError(fmt::format("no matching legal move for '{}'", san));
  if (matches > 1) throw IllegalMoveError(fmt::format("ambiguous SAN '{}'", san));
  return *found;
}

std::string to_san(const Position& p, const Move& m) {
  const auto moves = legal_moves(p);
  std::string out;
  if (is_castle(p, m)) {
    out = m.to > m.from ? "O-O" : "O-O-O";
  } else {
    const PieceKind kind = p.at(m.from).kind();
    const bool capture = is_capture(p, m);
    if (kind == PieceKind::Pawn) {
      if (capture) {
        out += static_cast<char>('a' + file_of(m.from));
        out += 'x';
      }
      out += square_name(m.to);
      if (m.promotion != PieceKind::None) {
        out += '=';
        out += letter(m.promotion);
      }
    } else {
      out += letter(kind);
      bool clash = false;
      bool same_file = false;
      bool same_rank = false;
      for (const Move& other : moves) {
        if (other.to != m.to || other.from == m.from || p.at(other.from).kind() != kind) continue;
        clash = true;
        same_file |= file_of(other.from) == file_of(m.from);
        same_rank |= rank_of(other.from) == rank_of(m.from);
      }
      if (clash) {
        if (!same_file) {
          out += static_cast<char>('a' + file_of(m.from));
        } else if (!same_rank) {
          out += static_cast<char>('1' + rank_of(m.from));
        } else {
          out += square_name(m.from);
        }
      }
      if (capture) out += 'x';
      out += square_name(m.to);
    }
  }
  const Position next = apply_move_unchecked(p, m);
  if (next.in_check()) out += legal_moves(next).empty() ? '#' : '+';
  return out;
}

}  // namespace brilliant::chess
