#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace royalgame {

enum class Color : std::uint8_t { White, Black };

constexpr Color operator~(Color c) { return c == Color::White ? Color::Black : Color::White; }

std::string_view to_string(Color c);

// Declaration order doubles as the promotion ordering used by legal_moves (N < B < R < Q).
enum class PieceKind : std::uint8_t { Pawn, Knight, Bishop, Rook, Queen, King };

inline constexpr int kPieceKindCount = 6;

struct Piece {
  PieceKind kind = PieceKind::Pawn;
  Color color = Color::White;

  friend constexpr bool operator==(Piece, Piece) = default;
};

// English letters: P N B R Q K. White uppercase, black lowercase.
char kind_letter(PieceKind kind);
char piece_letter(Piece piece);
std::optional<PieceKind> kind_from_letter(char upper);
std::optional<Piece> piece_from_letter(char letter);
std::string_view kind_name(PieceKind kind);

// One of the 64 board squares. Index = rank * 8 + file, so comparison is rank-major
// ascending with file ascending inside a rank.
class Square {
 public:
  constexpr Square() = default;

  static constexpr Square at(int file, int rank) {
    return Square(static_cast<std::uint8_t>(rank * 8 + file));
  }
  static constexpr Square from_index(int index) { return Square(static_cast<std::uint8_t>(index)); }
  static std::optional<Square> parse(std::string_view text);

  constexpr int file() const { return index_ & 7; }
  constexpr int rank() const { return index_ >> 3; }
  constexpr int index() const { return index_; }
  char file_char() const { return static_cast<char>('a' + file()); }
  char rank_char() const { return static_cast<char>('1' + rank()); }
  std::string name() const { return {file_char(), rank_char()}; }
  // Dark squares are a1, c1, ... (file + rank even).
  constexpr bool is_dark() const { return ((file() + rank()) & 1) == 0; }

  friend constexpr auto operator<=>(Square, Square) = default;

 private:
  explicit constexpr Square(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

inline constexpr int kSquareCount = 64;

enum class CastleSide : std::uint8_t { Kingside, Queenside };

struct Move {
  Square origin;
  Square destination;
  Piece piece;
  bool is_capture = false;
  std::optional<PieceKind> promotion;
  std::optional<CastleSide> castle;
  bool is_en_passant = false;

  // Coordinate form, e.g. "e2e4", "e7e8q".
  std::string uci() const;

  friend bool operator==(const Move&, const Move&) = default;
};

}  // namespace royalgame
