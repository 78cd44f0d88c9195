#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/error.hpp"
#include "royalgame/game_state.hpp"

namespace royalgame {

struct OnePlySolution {
  std::vector<Move> mates;   // successor is checkmate
  std::vector<Move> checks;  // successor is check but not mate
  std::vector<Move> quiet;   // everything else

  bool solvable() const { return !mates.empty() || !checks.empty(); }
};

// Exhaustive one-ply classification. Throws invalid-board unless white is to move.
OnePlySolution solve_one_ply(const GameState& board);
// Parse failures of the FEN are reported as invalid-board as well.
OnePlySolution solve_one_ply(std::string_view fen);

struct PuzzleInstance {
  std::string id;
  GameState board = GameState::initial();
  std::vector<Move> mates;
  std::vector<Move> checks;
  int piece_count = 0;
  Square black_king_square;
};

// Throws invalid-board or unsolvable-instance.
PuzzleInstance make_puzzle(const GameState& board, std::string id);

struct PuzzleDiagnostic {
  std::size_t record = 0;  // 1-based
  ErrorCode code = ErrorCode::MalformedRecord;
  std::string message;
};

struct PuzzleImport {
  std::vector<PuzzleInstance> instances;
  std::vector<PuzzleDiagnostic> diagnostics;
};

// Accepts FEN or EPD lines, PGN games carrying a FEN tag, or NDJSON objects with a "fen"
// field (and optional "id"). The format is sniffed from the first non-blank character.
// Records that fail are skipped with unsolvable-instance or malformed-record diagnostics.
PuzzleImport import_puzzles(std::istream& in, std::string_view source = "stdin");

struct PuzzleConstraints {
  int min_pieces = 3;
  int max_pieces = 32;
  bool require_mate = false;
  std::size_t max_attempts = 100000;  // playouts
  int max_plies = 200;
};

// Random legal playouts; each playout stops at a random ply and scans forward for the first
// white-to-move position meeting the constraints. Positions whose castling rights or
// en-passant target differ from what the square-list would imply are skipped so that the
// instruction shown to a model describes the same position the oracle scores. Boards are
// unique by placement within one call.
// Throws generation-exhausted when max_attempts playouts do not yield `count` instances.
std::vector<PuzzleInstance> generate_puzzles(std::uint64_t seed, std::size_t count,
                                             const PuzzleConstraints& constraints = {});

struct PuzzleSetStats {
  std::size_t count = 0;
  std::size_t distinct_black_king_squares = 0;
  int min_pieces = 0;
  int max_pieces = 0;
  double mean_pieces = 0.0;
  std::array<double, kPieceKindCount> mean_per_kind{};  // both colours, per instance
  std::size_t with_mate = 0;

  std::string report() const;
  std::string to_json() const;
};

PuzzleSetStats compute_puzzle_stats(const std::vector<PuzzleInstance>& puzzles);

// {"id","fen","mate":[SAN],"check":[SAN],"pieces","black_king"}
std::string puzzle_to_json_line(const PuzzleInstance& p);
PuzzleInstance puzzle_from_json_line(std::string_view line);

// sha256 of the JSON line.
std::string puzzle_digest(const PuzzleInstance& p);

}  // namespace royalgame
