#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/game_state.hpp"
#include "royalgame/pgn.hpp"
#include "royalgame/protocol.hpp"

namespace royalgame {

// Uniform over the legal moves, keyed by splitmix64(fnv1a64(square list + side) ^ seed).
// Throws no-legal-moves.
std::string random_legal_policy(const GameState& board, std::uint64_t seed);

// A mate if one exists, else a check, else random_legal_policy(board, 0). Throws no-legal-moves.
std::string greedy_solver_policy(const GameState& board);

// Modal white move per square-list board, plus the global modal move. Ties go to the
// lexicographically smallest SAN.
class FrequencyTable {
 public:
  void add(const std::string& square_list, const std::string& san);
  void add(const BoardMovePair& pair);

  static FrequencyTable from_pairs(const std::vector<BoardMovePair>& pairs);
  // NDJSON pair file as written by ingest; only white moves are counted.
  static FrequencyTable from_file(const std::filesystem::path& ndjson);

  bool empty() const { return global_.empty(); }
  std::size_t boards() const { return per_board_.size(); }
  // Throws empty-table.
  std::string lookup(const std::string& square_list) const;
  std::string global_modal() const;

 private:
  static std::string modal(const std::map<std::string, std::uint64_t>& counts);

  std::map<std::string, std::map<std::string, std::uint64_t>> per_board_;
  std::map<std::string, std::uint64_t> global_;
};

std::string frequency_policy(const GameState& board, const FrequencyTable& table);

// Emits a random legal move with probability p_legal per draw, otherwise a token that is not
// legal on the board (an absent piece or an unreachable square). Keyed by (board, seed,
// request id), so each retry attempt is an independent draw.
std::string noisy_policy(const GameState& board, std::uint64_t seed, std::string_view request_id,
                         double p_legal);

enum class PolicyKind { Random, Greedy, Frequency, Noisy };

struct PolicyOptions {
  PolicyKind kind = PolicyKind::Random;
  std::uint64_t seed = 0;
  double p_legal = 0.1;
  std::shared_ptr<const FrequencyTable> table;  // required for Frequency
};

// Protocol handler around a policy. The board is recovered from the prompt; prompts without a
// readable board get an empty response text.
class PolicyHandler final : public LineHandler {
 public:
  explicit PolicyHandler(PolicyOptions options);
  Hello hello() const override;
  GenerationResponse respond(const GenerationRequest& request) const override;

 private:
  PolicyOptions options_;
};

// "random", "greedy", "frequency", "noisy".
std::string_view to_string(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view s);

}  // namespace royalgame
