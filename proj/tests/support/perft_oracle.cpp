#include "support/perft_oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace oracle {

namespace {

bool is_white(char c) { return c >= 'A' && c <= 'Z'; }
bool is_black(char c) { return c >= 'a' && c <= 'z'; }
bool own(char c, bool white) { return white ? is_white(c) : is_black(c); }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool path_clear(const Board& b, int from, int to) {
  const int df = (to % 8) - (from % 8);
  const int dr = (to / 8) - (from / 8);
  const int sf = (df > 0) - (df < 0);
  const int sr = (dr > 0) - (dr < 0);
  int f = from % 8 + sf;
  int r = from / 8 + sr;
  while (r * 8 + f != to) {
    if (b.sq[r * 8 + f] != '.') return false;
    f += sf;
    r += sr;
  }
  return true;
}

// Could the piece on `from` capture on `to` (geometry + blockers only)?
bool attacks(const Board& b, int from, int to) {
  const char p = b.sq[from];
  const int df = (to % 8) - (from % 8);
  const int dr = (to / 8) - (from / 8);
  const int adf = std::abs(df);
  const int adr = std::abs(dr);
  switch (lower(p)) {
    case 'p': return adf == 1 && dr == (is_white(p) ? 1 : -1);
    case 'n': return (adf == 1 && adr == 2) || (adf == 2 && adr == 1);
    case 'k': return std::max(adf, adr) == 1;
    case 'r': return (df == 0 || dr == 0) && path_clear(b, from, to);
    case 'b': return adf == adr && adf > 0 && path_clear(b, from, to);
    case 'q': return (df == 0 || dr == 0 || adf == adr) && path_clear(b, from, to);
    default: return false;
  }
}

bool attacked_by(const Board& b, int target, bool white) {
  for (int s = 0; s < 64; ++s)
    if (b.sq[s] != '.' && own(b.sq[s], white) && s != target && attacks(b, s, target)) return true;
  return false;
}

int king_of(const Board& b, bool white) {
  for (int s = 0; s < 64; ++s)
    if (b.sq[s] == (white ? 'K' : 'k')) return s;
  return -1;
}

std::string sq_name(int s) { return {static_cast<char>('a' + s % 8), static_cast<char>('1' + s / 8)}; }

std::vector<std::string> candidates(const Board& b) {
  std::vector<std::string> out;
  const bool w = b.white_to_move;
  for (int from = 0; from < 64; ++from) {
    const char p = b.sq[from];
    if (p == '.' || !own(p, w)) continue;
    for (int to = 0; to < 64; ++to) {
      if (to == from) continue;
      const char t = b.sq[to];
      if (t != '.' && own(t, w)) continue;
      const int df = (to % 8) - (from % 8);
      const int dr = (to / 8) - (from / 8);
      bool ok = false;
      if (lower(p) == 'p') {
        const int dir = w ? 1 : -1;
        const int start = w ? 1 : 6;
        if (df == 0 && dr == dir && t == '.') ok = true;
        if (df == 0 && dr == 2 * dir && from / 8 == start && t == '.' && b.sq[from + 8 * dir] == '.') ok = true;
        if (std::abs(df) == 1 && dr == dir && (t != '.' || to == b.ep)) ok = true;
        if (ok && (to / 8 == 0 || to / 8 == 7)) {
          for (const char promo : {'n', 'b', 'r', 'q'}) out.push_back(sq_name(from) + sq_name(to) + promo);
          continue;
        }
      } else {
        ok = attacks(b, from, to);
      }
      if (ok) out.push_back(sq_name(from) + sq_name(to));
    }
  }
  // Castling.
  const int home = w ? 4 : 60;
  if (b.sq[home] == (w ? 'K' : 'k') && !attacked_by(b, home, !w)) {
    const char rook = w ? 'R' : 'r';
    if (b.castle[w ? 0 : 2] && b.sq[home + 3] == rook && b.sq[home + 1] == '.' && b.sq[home + 2] == '.' &&
        !attacked_by(b, home + 1, !w) && !attacked_by(b, home + 2, !w))
      out.push_back(sq_name(home) + sq_name(home + 2));
    if (b.castle[w ? 1 : 3] && b.sq[home - 4] == rook && b.sq[home - 1] == '.' && b.sq[home - 2] == '.' &&
        b.sq[home - 3] == '.' && !attacked_by(b, home - 1, !w) && !attacked_by(b, home - 2, !w))
      out.push_back(sq_name(home) + sq_name(home - 2));
  }
  return out;
}

}  // namespace

Board from_fen(std::string_view fen) {
  Board b;
  std::fill(std::begin(b.sq), std::end(b.sq), '.');
  std::istringstream in{std::string(fen)};
  std::string placement, side, castle, ep;
  in >> placement >> side >> castle >> ep;
  int r = 7, f = 0;
  for (const char c : placement) {
    if (c == '/') {
      --r;
      f = 0;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      f += c - '0';
    } else {
      b.sq[r * 8 + f++] = c;
    }
  }
  b.white_to_move = side == "w";
  for (const char c : castle) {
    if (c == 'K') b.castle[0] = true;
    if (c == 'Q') b.castle[1] = true;
    if (c == 'k') b.castle[2] = true;
    if (c == 'q') b.castle[3] = true;
  }
  if (ep != "-") b.ep = (ep[1] - '1') * 8 + (ep[0] - 'a');
  return b;
}

Board make_move(const Board& b, const std::string& uci) {
  Board n = b;
  const int from = (uci[1] - '1') * 8 + (uci[0] - 'a');
  const int to = (uci[3] - '1') * 8 + (uci[2] - 'a');
  const char p = b.sq[from];
  const bool w = b.white_to_move;
  n.sq[to] = uci.size() == 5 ? (w ? static_cast<char>(std::toupper(uci[4])) : uci[4]) : p;
  n.sq[from] = '.';
  n.ep = -1;
  if (lower(p) == 'p') {
    if (to == b.ep) n.sq[to + (w ? -8 : 8)] = '.';
    if (std::abs(to - from) == 16) n.ep = (to + from) / 2;
  }
  if (lower(p) == 'k') {
    if (to - from == 2) {
      n.sq[from + 1] = n.sq[from + 3];
      n.sq[from + 3] = '.';
    } else if (from - to == 2) {
      n.sq[from - 1] = n.sq[from - 4];
      n.sq[from - 4] = '.';
    }
    n.castle[w ? 0 : 2] = false;
    n.castle[w ? 1 : 3] = false;
  }
  const int corners[4] = {7, 0, 63, 56};
  for (int i = 0; i < 4; ++i)
    if (from == corners[i] || to == corners[i]) n.castle[i] = false;
  n.white_to_move = !w;
  return n;
}

std::vector<std::string> legal_moves(const Board& b) {
  std::vector<std::string> out;
  for (const auto& m : candidates(b)) {
    const Board n = make_move(b, m);
    if (!attacked_by(n, king_of(n, b.white_to_move), !b.white_to_move)) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t perft(const Board& b, int depth) {
  if (depth == 0) return 1;
  const auto moves = legal_moves(b);
  if (depth == 1) return moves.size();
  std::uint64_t total = 0;
  for (const auto& m : moves) total += perft(make_move(b, m), depth - 1);
  return total;
}

}  // namespace oracle
