#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "royalgame/game_state.hpp"
#include "royalgame/types.hpp"

namespace royalgame {

// Strict: the token must be byte-identical to the canonical rendering (after accepting
// "e.p." and zero-castling spellings). Used for corpora.
// Lenient: redundant disambiguators, capture marks, missing or wrong check suffixes, a "P"
// prefix on pawn moves and promotion without "=" are tolerated. Used for model output.
enum class SanMode { Strict, Lenient };

enum class SanSuffix { None, Check, Mate };

// Grammatical decomposition of a SAN token, before consulting any position.
struct SanParts {
  std::optional<CastleSide> castle;
  PieceKind kind = PieceKind::Pawn;
  std::optional<int> from_file;
  std::optional<int> from_rank;
  bool capture = false;
  Square destination;
  std::optional<PieceKind> promotion;
  SanSuffix suffix = SanSuffix::None;
};

// nullopt when the token does not match the grammar (under the given mode).
std::optional<SanParts> decompose_san(std::string_view token, SanMode mode);

// Resolves a token to the unique legal move it denotes. Errors: unparseable-token,
// piece-absent, no-matching-legal-move, ambiguous-token, notation-mismatch (strict only).
Move parse_san(const GameState& state, std::string_view token, SanMode mode = SanMode::Strict);

// Canonical SAN with minimal disambiguation and "+"/"#" from the successor position.
// Throws illegal-move when m is not legal in state.
std::string render_san(const GameState& state, const Move& m);

// Throws malformed-fen for syntax errors and invariant-violation for well-formed text that
// describes an impossible position. Four-field inputs get clocks "0 1".
GameState parse_fen(std::string_view fen);
std::string render_fen(const GameState& state);

inline constexpr std::string_view kInitialFen =
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

// "square:letter" pairs joined by ", ", sorted by square (rank-major, file ascending).
std::string render_square_list(const Placement& placement);
inline std::string render_square_list(const GameState& state) {
  return render_square_list(state.placement());
}

enum class SquareListMode { Strict, Lenient };

// Placement only. Strict mode additionally requires canonical ordering.
// Errors: bad-pair-syntax, duplicate-square, unordered-pairs.
Placement parse_square_list(std::string_view text, SquareListMode mode = SquareListMode::Lenient);

// Rebuilds a position from a bare placement: white to move, castling available iff king and
// rook stand on their initial squares, no en-passant target, clocks 0/1.
GameState state_from_placement(const Placement& placement);

}  // namespace royalgame
