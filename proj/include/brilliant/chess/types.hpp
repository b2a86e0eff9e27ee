#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace brilliant::chess {

enum class Color : std::uint8_t { White = 0, Black = 1 };

constexpr Color operator~(Color c) { return c == Color::White ? Color::Black : Color::White; }

// Ordered so that promotion kinds sort N < B < R < Q, which fixes the
// canonical move order.
enum class PieceKind : std::uint8_t { None = 0, Pawn, Knight, Bishop, Rook, Queen, King };

// Packed piece: 0 = empty, 1..6 white kinds, 9..14 black kinds.
class Piece {
 public:
  constexpr Piece() = default;
  constexpr Piece(Color c, PieceKind k)
      : code_(k == PieceKind::None ? 0 : static_cast<std::uint8_t>(static_cast<std::uint8_t>(k) | (c == Color::Black ? 8 : 0))) {}

  constexpr bool empty() const { return code_ == 0; }
  constexpr PieceKind kind() const { return static_cast<PieceKind>(code_ & 7); }
  constexpr Color color() const { return (code_ & 8) ? Color::Black : Color::White; }
  constexpr bool is(Color c, PieceKind k) const { return code_ == Piece(c, k).code_; }
  constexpr std::uint8_t code() const { return code_; }

  char to_char() const;
  static std::optional<Piece> from_char(char ch);

  friend constexpr bool operator==(Piece, Piece) = default;

 private:
  std::uint8_t code_ = 0;
};

// 0 = a1, 7 = h1, 56 = a8, 63 = h8.
using Square = std::uint8_t;
inline constexpr Square kNoSquare = 64;

constexpr int file_of(Square s) { return s & 7; }
constexpr int rank_of(Square s) { return s >> 3; }
constexpr Square make_square(int file, int rank) { return static_cast<Square>(rank * 8 + file); }

std::string square_name(Square s);
std::optional<Square> parse_square(std::string_view text);

struct Move {
  Square from = 0;
  Square to = 0;
  PieceKind promotion = PieceKind::None;

  friend constexpr auto operator<=>(const Move&, const Move&) = default;

  // Compact 16-bit form: from | to << 6 | promotion << 12.
  constexpr std::uint16_t encode() const {
    return static_cast<std::uint16_t>(from | (to << 6) | (static_cast<int>(promotion) << 12));
  }
  static constexpr Move decode(std::uint16_t v) {
    return Move{static_cast<Square>(v & 63), static_cast<Square>((v >> 6) & 63),
                static_cast<PieceKind>((v >> 12) & 7)};
  }
};

}  // namespace brilliant::chess
