#include "royalgame/puzzle.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "royalgame/digest.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/pgn.hpp"
#include "royalgame/sampling.hpp"

namespace royalgame {
namespace {

using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// FEN with 6 fields, or the 4-field prefix of an EPD record followed by operations.
GameState parse_fen_or_epd(std::string_view line) {
  const auto fields = split_ws(line);
  if (fields.size() < 4) throw Error(ErrorCode::MalformedFen, "expected at least 4 fields");
  auto join = [&](std::size_t n) {
    std::string s = fields[0];
    for (std::size_t i = 1; i < n; ++i) s += " " + fields[i];
    return s;
  };
  if (fields.size() >= 6) {
    try {
      return parse_fen(join(6));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedFen) throw;
    }
  }
  return parse_fen(join(4));
}

// True when the square-list rendering of the board rebuilds exactly this position.
bool lossless(const GameState& s) {
  const GameState rebuilt = state_from_placement(s.placement());
  return rebuilt.castling() == s.castling() && !s.en_passant();
}

std::vector<std::string> sans(const GameState& board, const std::vector<Move>& moves) {
  std::vector<std::string> out;
  out.reserve(moves.size());
  for (const Move& m : moves) out.push_back(render_san(board, m));
  return out;
}

}  // namespace

OnePlySolution solve_one_ply(const GameState& board) {
  if (board.side_to_move() != Color::White) {
    throw Error(ErrorCode::InvalidBoard, "white must be to move");
  }
  OnePlySolution out;
  for (const Move& m : legal_moves(board)) {
    const GameState next = apply_move_unchecked(board, m);
    if (!next.in_check()) {
      out.quiet.push_back(m);
    } else if (legal_moves(next).empty()) {
      out.mates.push_back(m);
    } else {
      out.checks.push_back(m);
    }
  }
  return out;
}

OnePlySolution solve_one_ply(std::string_view fen) {
  std::optional<GameState> board;
  try {
    board = parse_fen_or_epd(fen);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidBoard, e.what());
  }
  return solve_one_ply(*board);
}

PuzzleInstance make_puzzle(const GameState& board, std::string id) {
  OnePlySolution sol = solve_one_ply(board);
  if (!sol.solvable()) {
    throw Error(ErrorCode::UnsolvableInstance, "no checking move in " + render_fen(board));
  }
  PuzzleInstance p;
  p.id = std::move(id);
  p.board = board;
  p.mates = std::move(sol.mates);
  p.checks = std::move(sol.checks);
  p.piece_count = board.placement().count();
  p.black_king_square = board.king_square(Color::Black);
  return p;
}

PuzzleImport import_puzzles(std::istream& in, std::string_view source) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  PuzzleImport out;
  const std::string label(source);

  auto admit = [&](std::size_t record, const std::function<GameState()>& load, std::string id) {
    try {
      GameState board = load();
      out.instances.push_back(make_puzzle(board, std::move(id)));
    } catch (const Error& e) {
      ErrorCode code = e.code();
      if (code != ErrorCode::UnsolvableInstance) code = ErrorCode::MalformedRecord;
      out.diagnostics.push_back({record, code, e.what()});
    }
  };

  const auto first = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first == std::string::npos) return out;

  if (text[first] == '[') {
    const PgnParseResult parsed = parse_pgn_text(text, source);
    for (const auto& d : parsed.diagnostics) {
      out.diagnostics.push_back({d.game_index + 1, ErrorCode::MalformedRecord, d.message});
    }
    for (const PgnGame& game : parsed.games) {
      if (!game.tag("FEN")) {
        out.diagnostics.push_back({game.index + 1, ErrorCode::MalformedRecord, "game has no FEN tag"});
        continue;
      }
      admit(game.index + 1, [&] { return game.start(); }, game.id());
    }
    std::stable_sort(out.diagnostics.begin(), out.diagnostics.end(),
                     [](const auto& a, const auto& b) { return a.record < b.record; });
    return out;
  }

  const bool ndjson = text[first] == '{';
  std::istringstream lines(text);
  std::string line;
  std::size_t record = 0;
  while (std::getline(lines, line)) {
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    ++record;
    if (ndjson) {
      std::string fen;
      std::string id = label + "#" + std::to_string(record);
      try {
        const auto j = nlohmann::json::parse(body);
        fen = j.at("fen").get<std::string>();
        if (j.contains("id")) id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      } catch (const nlohmann::json::exception& e) {
        out.diagnostics.push_back({record, ErrorCode::MalformedRecord, e.what()});
        continue;
      }
      admit(record, [&] { return parse_fen_or_epd(fen); }, id);
    } else {
      std::string id = label + "#" + std::to_string(record);
      const std::string rec(body);
      admit(record, [&] { return parse_fen_or_epd(rec); }, id);
    }
  }
  return out;
}

std::vector<PuzzleInstance> generate_puzzles(std::uint64_t seed, std::size_t count,
                                             const PuzzleConstraints& c) {
  if (c.min_pieces > c.max_pieces || c.min_pieces < 2 || c.max_plies < 1) {
    throw Error(ErrorCode::SchemaError, "bad puzzle constraints");
  }
  std::vector<PuzzleInstance> out;
  std::set<std::string> seen;
  for (std::size_t attempt = 0; attempt < c.max_attempts && out.size() < count; ++attempt) {
    DeterministicRng rng(splitmix64(seed ^ splitmix64(attempt)));
    const int stop = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c.max_plies)));
    GameState state = GameState::initial();
    for (int ply = 0; ply < c.max_plies; ++ply) {
      const std::vector<Move> moves = legal_moves(state);
      if (moves.empty()) break;
      if (ply >= stop && state.side_to_move() == Color::White) {
        const int pieces = state.placement().count();
        if (pieces >= c.min_pieces && pieces <= c.max_pieces && lossless(state)) {
          const OnePlySolution sol = solve_one_ply(state);
          if (c.require_mate ? !sol.mates.empty() : sol.solvable()) {
            if (seen.insert(render_square_list(state)).second) {
              out.push_back(make_puzzle(state, "gen-" + std::to_string(seed) + "-" + std::to_string(attempt)));
            }
            break;
          }
        }
      }
      state = apply_move_unchecked(state, moves[rng.below(moves.size())]);
    }
  }
  if (out.size() < count) {
    throw Error(ErrorCode::GenerationExhausted, "found " + std::to_string(out.size()) + " of " +
                                                    std::to_string(count) + " after " +
                                                    std::to_string(c.max_attempts) + " playouts");
  }
  return out;
}

PuzzleSetStats compute_puzzle_stats(const std::vector<PuzzleInstance>& puzzles) {
  PuzzleSetStats s;
  s.count = puzzles.size();
  if (puzzles.empty()) return s;
  std::set<int> kings;
  long long total = 0;
  std::array<long long, kPieceKindCount> kinds{};
  s.min_pieces = puzzles.front().piece_count;
  s.max_pieces = puzzles.front().piece_count;
  for (const PuzzleInstance& p : puzzles) {
    kings.insert(p.black_king_square.index());
    total += p.piece_count;
    s.min_pieces = std::min(s.min_pieces, p.piece_count);
    s.max_pieces = std::max(s.max_pieces, p.piece_count);
    if (!p.mates.empty()) ++s.with_mate;
    for (int k = 0; k < kPieceKindCount; ++k) {
      const auto kind = static_cast<PieceKind>(k);
      kinds[static_cast<std::size_t>(k)] += p.board.placement().count(Piece{kind, Color::White}) +
                                            p.board.placement().count(Piece{kind, Color::Black});
    }
  }
  const double n = static_cast<double>(puzzles.size());
  s.distinct_black_king_squares = kings.size();
  s.mean_pieces = static_cast<double>(total) / n;
  for (std::size_t k = 0; k < kinds.size(); ++k) s.mean_per_kind[k] = static_cast<double>(kinds[k]) / n;
  return s;
}

std::string PuzzleSetStats::report() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu problems (%zu with a mate). The black king stands on %zu of the 64 squares. "
                "Problems hold between %d and %d pieces, %.1f on average.",
                count, with_mate, distinct_black_king_squares, min_pieces, max_pieces, mean_pieces);
  std::string out = buf;
  out += " Mean pieces per problem:";
  for (int k = 0; k < kPieceKindCount; ++k) {
    std::snprintf(buf, sizeof buf, " %s %.2f%s", std::string(kind_name(static_cast<PieceKind>(k))).c_str(),
                  mean_per_kind[static_cast<std::size_t>(k)], k + 1 < kPieceKindCount ? "," : ".");
    out += buf;
  }
  return out;
}

std::string PuzzleSetStats::to_json() const {
  ordered_json j;
  j["count"] = count;
  j["with_mate"] = with_mate;
  j["distinct_black_king_squares"] = distinct_black_king_squares;
  j["min_pieces"] = min_pieces;
  j["max_pieces"] = max_pieces;
  j["mean_pieces"] = mean_pieces;
  ordered_json kinds = ordered_json::object();
  for (int k = 0; k < kPieceKindCount; ++k) {
    kinds[std::string(kind_name(static_cast<PieceKind>(k)))] = mean_per_kind[static_cast<std::size_t>(k)];
  }
  j["mean_per_kind"] = kinds;
  return j.dump();
}

std::string puzzle_to_json_line(const PuzzleInstance& p) {
  ordered_json j;
  j["id"] = p.id;
  j["fen"] = render_fen(p.board);
  j["mate"] = sans(p.board, p.mates);
  j["check"] = sans(p.board, p.checks);
  j["pieces"] = p.piece_count;
  j["black_king"] = p.black_king_square.name();
  return j.dump();
}

PuzzleInstance puzzle_from_json_line(std::string_view line) {
  std::string id;
  std::string fen;
  try {
    const auto j = nlohmann::json::parse(line);
    id = j.at("id").get<std::string>();
    fen = j.at("fen").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
  std::optional<GameState> board;
  try {
    board = parse_fen(fen);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
  return make_puzzle(*board, id);
}

std::string puzzle_digest(const PuzzleInstance& p) { return sha256_hex(puzzle_to_json_line(p)); }

}  // namespace royalgame
