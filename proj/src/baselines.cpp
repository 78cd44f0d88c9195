#include "royalgame/baselines.hpp"

#include <fstream>

#include "json.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/digest.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/puzzle.hpp"
#include "royalgame/sampling.hpp"

namespace royalgame {
namespace {

std::uint64_t board_key(const GameState& board) {
  std::string key = render_square_list(board);
  key += board.side_to_move() == Color::White ? " w" : " b";
  return fnv1a64(key);
}

std::vector<Move> require_moves(const GameState& board) {
  auto moves = legal_moves(board);
  if (moves.empty()) throw Error(ErrorCode::NoLegalMoves, render_fen(board));
  return moves;
}

std::string pick(const GameState& board, const std::vector<Move>& moves, DeterministicRng& rng) {
  return render_san(board, moves[rng.below(moves.size())]);
}

}  // namespace

std::string random_legal_policy(const GameState& board, std::uint64_t seed) {
  const auto moves = require_moves(board);
  DeterministicRng rng(splitmix64(board_key(board) ^ seed));
  return pick(board, moves, rng);
}

std::string greedy_solver_policy(const GameState& board) {
  require_moves(board);
  if (board.side_to_move() == Color::White) {
    const OnePlySolution sol = solve_one_ply(board);
    if (!sol.mates.empty()) return render_san(board, sol.mates.front());
    if (!sol.checks.empty()) return render_san(board, sol.checks.front());
  }
  return random_legal_policy(board, 0);
}

void FrequencyTable::add(const std::string& square_list, const std::string& san) {
  ++per_board_[square_list][san];
  ++global_[san];
}

void FrequencyTable::add(const BoardMovePair& pair) {
  if (pair.mover != Color::White) return;
  add(render_square_list(pair.board), pair.san);
}

FrequencyTable FrequencyTable::from_pairs(const std::vector<BoardMovePair>& pairs) {
  FrequencyTable t;
  for (const auto& p : pairs) t.add(p);
  return t;
}

FrequencyTable FrequencyTable::from_file(const std::filesystem::path& ndjson) {
  std::ifstream in(ndjson);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + ndjson.string());
  FrequencyTable t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.value("mover", "white") != "white") continue;
      t.add(j.at("board").get<std::string>(), j.at("move").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, ndjson.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return t;
}

std::string FrequencyTable::modal(const std::map<std::string, std::uint64_t>& counts) {
  const std::pair<const std::string, std::uint64_t>* best = nullptr;
  for (const auto& entry : counts) {
    if (!best || entry.second > best->second) best = &entry;
  }
  return best->first;
}

std::string FrequencyTable::lookup(const std::string& square_list) const {
  if (global_.empty()) throw Error(ErrorCode::EmptyTable, "frequency table has no entries");
  const auto it = per_board_.find(square_list);
  return it != per_board_.end() ? modal(it->second) : modal(global_);
}

std::string FrequencyTable::global_modal() const {
  if (global_.empty()) throw Error(ErrorCode::EmptyTable, "frequency table has no entries");
  return modal(global_);
}

std::string frequency_policy(const GameState& board, const FrequencyTable& table) {
  return table.lookup(render_square_list(board));
}

std::string noisy_policy(const GameState& board, std::uint64_t seed, std::string_view request_id,
                         double p_legal) {
  const auto moves = require_moves(board);
  DeterministicRng rng(splitmix64(board_key(board) ^ splitmix64(seed ^ fnv1a64(request_id))));
  if (rng.unit() < p_legal) return pick(board, moves, rng);
  static constexpr std::string_view kLetters = "NBRQK";
  for (int tries = 0; tries < 256; ++tries) {
    std::string token(1, kLetters[rng.below(kLetters.size())]);
    token += Square::from_index(static_cast<int>(rng.below(kSquareCount))).name();
    try {
      parse_san(board, token, SanMode::Lenient);
    } catch (const Error&) {
      return token;
    }
  }
  return "Kz9";
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Random: return "random";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Frequency: return "frequency";
    case PolicyKind::Noisy: return "noisy";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view s) {
  for (auto k : {PolicyKind::Random, PolicyKind::Greedy, PolicyKind::Frequency, PolicyKind::Noisy}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::SchemaError, "unknown policy '" + std::string(s) + "'");
}

PolicyHandler::PolicyHandler(PolicyOptions options) : options_(std::move(options)) {
  if (options_.kind == PolicyKind::Frequency && (!options_.table || options_.table->empty())) {
    throw Error(ErrorCode::EmptyTable, "frequency policy needs a non-empty table");
  }
}

Hello PolicyHandler::hello() const {
  return Hello{"baseline-" + std::string(to_string(options_.kind)), std::string(kProtocolVersion), 64, false};
}

GenerationResponse PolicyHandler::respond(const GenerationRequest& request) const {
  GenerationResponse out{request.id, ""};
  const auto board = board_from_prompt(request.prompt);
  if (!board) return out;
  try {
    switch (options_.kind) {
      case PolicyKind::Random:
        // Sampling requests draw afresh per request id; deterministic ones depend on the board only.
        out.text = random_legal_policy(*board, request.sample ? options_.seed ^ fnv1a64(request.id) : options_.seed);
        break;
      case PolicyKind::Greedy: out.text = greedy_solver_policy(*board); break;
      case PolicyKind::Frequency: out.text = frequency_policy(*board, *options_.table); break;
      case PolicyKind::Noisy: out.text = noisy_policy(*board, options_.seed, request.id, options_.p_legal); break;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoLegalMoves) throw;
  }
  return out;
}

}  // namespace royalgame
