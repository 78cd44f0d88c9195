#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/pgn.hpp"
#include "royalgame/protocol.hpp"

namespace royalgame {

struct IngestResult {
  std::vector<PgnGame> games;
  std::vector<PgnDiagnostic> diagnostics;
  std::vector<BoardMovePair> all_pairs;  // every ply, for statistics
  std::vector<BoardMovePair> pairs;      // after filter and optional dedupe
  CorpusStats stats;
};

// Directories contribute their *.pgn files in name order. Throws io-error for missing inputs.
IngestResult ingest_pgn_files(const std::vector<std::filesystem::path>& inputs, PairFilter filter,
                              bool dedupe);

void write_pairs(const std::vector<BoardMovePair>& pairs, const std::filesystem::path& ndjson);

// "cmd:<shell command>", "http://host:port[/path]", or "baseline:<policy>[:<arg>]" where arg
// is a seed for random and noisy ("noisy:<seed>:<p_legal>" also works) and a pair file for
// frequency. Relative table paths resolve against base_dir.
EndpointFactory endpoint_from_spec(std::string_view spec, const std::filesystem::path& base_dir = ".");

struct StageOutcome {
  std::string stage;
  std::string status;  // "ran", "skipped", "failed"
  std::string detail;
};

struct PipelineResult {
  std::vector<StageOutcome> stages;
  bool lint_violations = false;
  int exit_code() const;
};

// Validates the config (schema-error), then runs the declared stages in order. Each stage is
// skipped when its recorded input fingerprint and output digests still match. A failing stage
// stops the run; its outcome names the stage. Every outcome is appended to
// <workdir>/journal.ndjson.
PipelineResult run_pipeline(const std::filesystem::path& config_file);

// Throws schema-error describing the first problem.
void validate_config(std::string_view config_json);

}  // namespace royalgame
