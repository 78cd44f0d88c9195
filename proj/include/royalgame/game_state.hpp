#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/types.hpp"

namespace royalgame {

// Piece placement only. Cells hold 0 for empty, otherwise 1 + kind + 6 * color.
class Placement {
 public:
  std::optional<Piece> at(Square sq) const {
    const auto code = cells_[static_cast<std::size_t>(sq.index())];
    if (code == 0) return std::nullopt;
    return Piece{static_cast<PieceKind>((code - 1) % kPieceKindCount),
                 static_cast<Color>((code - 1) / kPieceKindCount)};
  }
  void set(Square sq, std::optional<Piece> piece) {
    cells_[static_cast<std::size_t>(sq.index())] =
        piece ? static_cast<std::uint8_t>(1 + static_cast<int>(piece->kind) +
                                          kPieceKindCount * static_cast<int>(piece->color))
              : std::uint8_t{0};
  }
  bool empty(Square sq) const { return cells_[static_cast<std::size_t>(sq.index())] == 0; }
  int count() const;
  int count(Piece piece) const;

  friend bool operator==(const Placement&, const Placement&) = default;

 private:
  std::array<std::uint8_t, kSquareCount> cells_{};
};

struct CastlingRights {
  bool white_kingside = false;
  bool white_queenside = false;
  bool black_kingside = false;
  bool black_queenside = false;

  bool get(Color c, CastleSide side) const;
  void set(Color c, CastleSide side, bool value);
  bool any() const { return white_kingside || white_queenside || black_kingside || black_queenside; }

  static CastlingRights all() { return {true, true, true, true}; }

  friend bool operator==(const CastlingRights&, const CastlingRights&) = default;
};

// A complete, validated position. Immutable once constructed; successors are produced by
// apply_move.
class GameState {
 public:
  static GameState initial();

  // Throws Error(InvalidState) naming the first broken invariant.
  static GameState create(const Placement& placement, Color side_to_move, CastlingRights castling,
                          std::optional<Square> en_passant, int halfmove_clock,
                          int fullmove_number);

  // Description of the first violated invariant, or nullopt when the inputs form a valid state.
  static std::optional<std::string> check_invariants(const Placement& placement, Color side_to_move,
                                                     CastlingRights castling,
                                                     std::optional<Square> en_passant,
                                                     int halfmove_clock, int fullmove_number);

  const Placement& placement() const { return placement_; }
  std::optional<Piece> at(Square sq) const { return placement_.at(sq); }
  Color side_to_move() const { return side_; }
  CastlingRights castling() const { return castling_; }
  std::optional<Square> en_passant() const { return en_passant_; }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }
  Square king_square(Color c) const { return kings_[static_cast<std::size_t>(c)]; }

  bool attacked_by(Square sq, Color attacker) const;
  // True when the side to move has its king attacked.
  bool in_check() const { return attacked_by(king_square(side_), ~side_); }

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  friend GameState apply_move_unchecked(const GameState& state, const Move& m);

  GameState() = default;

  Placement placement_;
  Color side_ = Color::White;
  CastlingRights castling_;
  std::optional<Square> en_passant_;
  int halfmove_ = 0;
  int fullmove_ = 1;
  std::array<Square, 2> kings_{};
};

enum class GameStatus { Ongoing, Check, Checkmate, Stalemate, DrawInsufficientMaterial };

std::string_view to_string(GameStatus s);

// Ordered by origin square, then destination, then promotion kind.
std::vector<Move> legal_moves(const GameState& state);

// Throws Error(IllegalMove) unless m is one of legal_moves(state).
GameState apply_move(const GameState& state, const Move& m);

// m must come from legal_moves(state); no legality check is performed.
GameState apply_move_unchecked(const GameState& state, const Move& m);

GameStatus status(const GameState& state);

bool insufficient_material(const Placement& placement);

// Attack test on a bare placement; no validity requirements.
bool square_attacked(const Placement& placement, Square sq, Color attacker);

std::uint64_t perft(const GameState& state, int depth);

}  // namespace royalgame
