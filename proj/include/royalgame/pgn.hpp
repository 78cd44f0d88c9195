#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "royalgame/game_state.hpp"

namespace royalgame {

struct PgnGame {
  std::vector<std::pair<std::string, std::string>> tags;  // in file order
  std::vector<std::string> moves;                         // mainline SAN tokens
  std::string result;                                     // "1-0", "0-1", "1/2-1/2", "*" or empty
  std::string source;                                     // file label
  std::size_t index = 0;                                  // 0-based game index within source
  std::size_t line = 0;                                   // 1-based line where the game starts

  std::optional<std::string> tag(std::string_view name) const;
  // "<source>#<index>"
  std::string id() const;
  // Start position: the FEN tag when SetUp is "1" (or a FEN tag is present), else the initial array.
  GameState start() const;
};

struct PgnDiagnostic {
  std::string source;
  std::size_t game_index = 0;
  std::size_t line = 0;
  std::string message;
};

struct PgnParseResult {
  std::vector<PgnGame> games;
  std::vector<PgnDiagnostic> diagnostics;
};

// Reads every game in the stream. Comments, NAGs, move numbers and recursive variations are
// discarded. Games that are malformed or do not replay legally (strict SAN) are skipped with a
// diagnostic; the stream itself never aborts. Lines that are not valid UTF-8 are read as Latin-1.
PgnParseResult parse_pgn_stream(std::istream& in, std::string_view source = "stdin");
PgnParseResult parse_pgn_text(std::string_view text, std::string_view source = "memory");

enum class PairFilter { All, WhiteOnly };

struct PairSource {
  std::string game_id;
  std::size_t ply = 0;  // 1-based ply index within the game
  std::string white;
  std::string black;
  std::string label;    // source-file label, used for player attribution
};

struct BoardMovePair {
  GameState board;  // position before the move
  Move move;
  std::string san;
  Color mover = Color::White;
  PairSource source;
};

std::vector<BoardMovePair> extract_pairs(const std::vector<PgnGame>& games, PairFilter filter);

// Keeps the first occurrence of each (square-list board, SAN) key, in input order.
std::vector<BoardMovePair> dedupe_pairs(const std::vector<BoardMovePair>& pairs);

// One JSON object per line.
std::string pair_to_json_line(const BoardMovePair& pair);
BoardMovePair pair_from_json_line(std::string_view line);

struct CountEntry {
  std::string key;
  std::uint64_t count = 0;
};

struct CorpusStats {
  std::uint64_t games = 0;
  std::uint64_t total_pairs = 0;
  std::uint64_t white_pairs = 0;
  std::uint64_t black_pairs = 0;
  std::uint64_t unique_white_pairs = 0;
  double mean_white_moves_per_game = 0.0;
  std::uint64_t max_white_moves_per_game = 0;
  std::vector<CountEntry> top_white_moves;   // descending count, ties by key
  std::vector<CountEntry> top_white_boards;
  std::vector<CountEntry> player_moves;      // all plies per source label, descending
};

// Commutative accumulation so per-file work can be merged in any order.
class StatsAccumulator {
 public:
  void add_game(const PgnGame& game);
  void add_pair(const BoardMovePair& pair);
  void merge(const StatsAccumulator& other);
  CorpusStats finish(std::size_t top_k = 10) const;

 private:
  std::uint64_t games_ = 0;
  std::uint64_t black_pairs_ = 0;
  std::map<std::string, std::uint64_t> white_per_game_;
  std::map<std::string, std::uint64_t> white_moves_;
  std::map<std::string, std::uint64_t> white_boards_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> white_pair_keys_;
  std::map<std::string, std::uint64_t> players_;
};

// `pairs` should be the unfiltered pair sequence of `games`.
CorpusStats compute_stats(const std::vector<BoardMovePair>& pairs, const std::vector<PgnGame>& games,
                          std::size_t top_k = 10);

// summary.csv, top_moves.csv, top_boards.csv, players.csv
void write_stats_csv(const CorpusStats& stats, const std::string& directory);

}  // namespace royalgame
