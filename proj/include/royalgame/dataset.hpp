#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/pgn.hpp"

namespace royalgame {

inline constexpr std::string_view kGoalSentence =
    "You are a chess Grandmaster and checkmate # is your goal.";
inline constexpr std::string_view kTaskSentence = "Predict the next best move on this SAN chess board: ";
inline constexpr std::string_view kPromptPreamble =
    "Below is an instruction that describes a task. Write a response that appropriately "
    "completes the request. ### Instruction: ";
inline constexpr std::string_view kResponseMarker = "### Response:";
inline constexpr int kTemplateVersion = 1;

// [goal sentence + " "] + task sentence + square-list board.
std::string make_instruction(std::string_view square_list, bool goal_sentence);

struct ParsedInstruction {
  bool goal_sentence = false;
  std::string board;  // square-list text
};

std::optional<ParsedInstruction> parse_instruction(std::string_view instruction);

struct ExampleMeta {
  std::size_t record = 0;  // index into the pool
  std::string game_id;
  std::size_t ply = 0;
  bool goal_sentence = true;
};

struct InstructionExample {
  std::string instruction;
  std::string output;
  ExampleMeta meta;
};

// The evaluation prompt; when `output` is given the training form is produced with the output
// appended after the response marker.
std::string render_prompt(std::string_view instruction, std::optional<std::string_view> output = std::nullopt);
inline std::string render_prompt(const InstructionExample& ex, bool with_output = false) {
  return with_output ? render_prompt(ex.instruction, std::string_view(ex.output)) : render_prompt(ex.instruction);
}

// Recovers the instruction from a rendered prompt (with or without a trailing output). A
// string that is not a rendered prompt is returned unchanged.
std::string_view instruction_from_prompt(std::string_view prompt);

// The board an instruction or prompt describes, rebuilt by state_from_placement.
std::optional<GameState> board_from_prompt(std::string_view prompt);

// {"instruction":…,"input":"","output":…}
std::string example_to_json_line(const InstructionExample& ex);

enum class SourceDataset { Wsm, UniqueWsm, NoGoalWsm };
std::string_view to_string(SourceDataset s);
std::optional<SourceDataset> parse_source_dataset(std::string_view s);

struct CohortSpec {
  std::string name = "cohort";
  SourceDataset source = SourceDataset::Wsm;
  std::size_t size = 1000;
  std::optional<std::uint64_t> seed = 41;
  std::size_t test_size = 10000;
  bool goal_sentence = true;
};

struct CohortManifest {
  CohortSpec spec;
  std::map<std::string, std::string> digests;  // file name -> sha256
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::size_t pool_size = 0;
  std::size_t excluded_unrepresentable = 0;
  std::size_t excluded_duplicates = 0;  // Unique-WSM only
  std::string pool_digest;
  std::string rng_algorithm;
  std::string created;
  int template_version = kTemplateVersion;
  std::vector<std::string> warnings;
};

struct Pool {
  std::vector<BoardMovePair> pairs;
  std::string digest;  // sha256 of the pool file bytes, empty for in-memory pools
};

Pool load_pool(const std::filesystem::path& ndjson);

// True when the pair's move survives the square-list round trip: it is still legal on the
// board rebuilt by state_from_placement. En-passant captures are the usual casualties.
bool representable(const BoardMovePair& pair);

// Samples test then train records without replacement from the representable white-to-move
// pairs (first occurrences only for Unique-WSM) and writes <name>.train.ndjson, <name>.test.ndjson, <name>.train.json,
// <name>.{train,test}.ids.ndjson and <name>.manifest.json into out_dir.
// Errors: seed-missing, insufficient-pool, malformed-record (pool pair not white to move).
CohortManifest build_cohort(const Pool& pool, const CohortSpec& spec, const std::filesystem::path& out_dir);

// One cohort per size, named "<base.name>-<size>". Sizes the pool cannot cover are shrunk to
// what remains after the test set, with a warning in the manifest.
std::vector<CohortManifest> build_cohort_ladder(const Pool& pool, const CohortSpec& base,
                                                const std::vector<std::size_t>& sizes,
                                                const std::filesystem::path& out_dir);

std::string manifest_to_json(const CohortManifest& m);

struct LintViolation {
  std::string file;
  std::size_t line = 0;
  std::string code;
  std::string detail;
};

struct LintReport {
  std::size_t records = 0;
  std::size_t empty_instructions = 0;
  double duplicate_rate = 0.0;
  std::map<int, std::size_t> piece_counts;  // pieces on board -> records
  std::vector<LintViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_json() const;
};

// Re-parses every record of NDJSON or JSON-array cohort files and checks each output against
// the board rebuilt from its instruction.
LintReport validate_cohort(const std::vector<std::filesystem::path>& files);

}  // namespace royalgame
