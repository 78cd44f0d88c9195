#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "royalgame/game_state.hpp"
#include "royalgame/protocol.hpp"

namespace royalgame {

enum class Label { Legal, LegalCheck, LegalMate, Illegal, PieceNotOnBoard, Unparseable };
inline constexpr std::array<Label, 6> kAllLabels{Label::Legal,   Label::LegalCheck,      Label::LegalMate,
                                                 Label::Illegal, Label::PieceNotOnBoard, Label::Unparseable};

// "legal", "legal-and-check", "legal-and-mate", "illegal", "piece-not-on-board", "unparseable"
std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);
constexpr bool is_legal(Label l) { return l == Label::Legal || l == Label::LegalCheck || l == Label::LegalMate; }

// Text after the first "### Response:" (or all of it), trimmed, first whitespace-delimited
// token, trailing punctuation removed except "+", "#" and a promotion "=X". nullopt when
// nothing is left.
std::optional<std::string> extract_move(std::string_view raw);

struct Classification {
  Label label = Label::Unparseable;
  // For illegal and piece-not-on-board tokens: the move's geometric effect, forced onto a copy
  // of the board, attacks the opposing king. For legal tokens: the successor is check or mate.
  bool would_check_or_mate = false;
};

// Total: every token gets a label. Lenient SAN is used so suffixes and redundant marks written
// by the model do not matter; ambiguous tokens count as illegal.
Classification classify(const GameState& board, std::optional<std::string_view> token);

struct EvalInstance {
  std::string id;
  GameState board = GameState::initial();
  std::string instruction;
};

EvalInstance make_eval_instance(std::string id, const GameState& board, bool goal_sentence = true);

// NDJSON lines carrying "fen" (puzzle or pair files) or "instruction" (cohort files), or a JSON
// array of cohort records. Ids come from an "id" field when present, else "<file stem>:<line>".
std::vector<EvalInstance> load_eval_dataset(const std::filesystem::path& path, bool goal_sentence = true);

enum class EvalMode { SingleShot, Retry };
std::string_view to_string(EvalMode m);
EvalMode parse_eval_mode(std::string_view s);  // "single" or "retry"

struct EvalProtocol {
  EvalMode mode = EvalMode::SingleShot;
  double temperature = 1.0;
  int max_retries = 100;
  std::chrono::milliseconds timeout{10000};
  int concurrency = 1;  // capped by the endpoint's declared capacity
};

struct EvalRecord {
  std::string id;
  std::string fen;
  std::string prompt;
  std::string raw;
  std::optional<std::string> token;
  Label label = Label::Unparseable;      // final label
  Label raw_label = Label::Unparseable;  // label of the last attempt's token
  bool would_check_or_mate = false;
  int attempts = 0;
  double latency_ms = 0.0;
  bool errored = false;
  std::string error;
};

std::string record_to_json_line(const EvalRecord& r);
EvalRecord record_from_json_line(std::string_view line);

struct ReferenceLine {
  std::string metric;
  double value = 0.0;
  std::string context;
};

// Published figures the harness cannot reproduce at desk scale, carried into reports for
// comparison only.
std::vector<ReferenceLine> default_reference_lines();

struct MetricsReport {
  std::size_t instances = 0;
  std::size_t attempted = 0;
  std::size_t errored = 0;
  std::array<std::size_t, kAllLabels.size()> counts{};
  std::array<double, kAllLabels.size()> percent{};
  double legal_pct = 0.0;
  double legal_check_mate_pct = 0.0;
  double legal_mate_pct = 0.0;
  double illegal_check_mate_pct = 0.0;
  double piece_absent_check_mate_pct = 0.0;
  double mean_attempts = 0.0;

  EvalProtocol protocol;
  std::string endpoint;
  std::string dataset_digest;
  std::vector<ReferenceLine> references;

  std::size_t count(Label l) const { return counts[static_cast<std::size_t>(l)]; }
  double pct(Label l) const { return percent[static_cast<std::size_t>(l)]; }
  std::string to_json() const;
  std::string plot_csv() const;
};

// Percentages are over attempted (non-errored) records.
MetricsReport aggregate(const std::vector<EvalRecord>& records, const EvalProtocol& protocol);

struct EvalOutcome {
  MetricsReport report;
  std::vector<EvalRecord> records;  // dataset order
};

// Errors: protocol-violation propagates; endpoint-timeout marks the instance errored.
EvalOutcome evaluate(const std::vector<EvalInstance>& dataset, const EndpointFactory& endpoint,
                     const EvalProtocol& protocol);

// Dataset digest over ids and FENs, so reports identify the test set independently of file
// layout.
std::string dataset_digest(const std::vector<EvalInstance>& dataset);

// Re-classifies every non-errored record from its stored FEN and token. Returns the ids whose
// stored labels differ.
std::vector<std::string> audit_replay(const std::vector<EvalRecord>& records, EvalMode mode);

struct SweepPoint {
  double temperature = 0.0;
  MetricsReport report;
};

// Retry-mode evaluation at each temperature.
std::vector<SweepPoint> sweep_temperature(const std::vector<EvalInstance>& dataset,
                                          const EndpointFactory& endpoint, const EvalProtocol& base,
                                          const std::vector<double>& temperatures);
std::string sweep_csv(const std::vector<SweepPoint>& points);

// report.json, records.ndjson, plotdata.csv
void write_eval_outputs(const EvalOutcome& outcome, const std::filesystem::path& dir);

}  // namespace royalgame
