#include "royalgame/dataset.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "royalgame/digest.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/sampling.hpp"

namespace royalgame {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

InstructionExample example_for(const BoardMovePair& pair, std::size_t record, bool goal) {
  return InstructionExample{make_instruction(render_square_list(pair.board), goal), pair.san,
                            ExampleMeta{record, pair.source.game_id, pair.source.ply, goal}};
}

json spec_to_json(const CohortSpec& s) {
  json j = {{"name", s.name},
            {"source", std::string(to_string(s.source))},
            {"size", s.size},
            {"test_size", s.test_size},
            {"goal_sentence", s.goal_sentence}};
  j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
  return j;
}

}  // namespace

std::string make_instruction(std::string_view square_list, bool goal_sentence) {
  std::string out;
  if (goal_sentence) {
    out += kGoalSentence;
    out += ' ';
  }
  out += kTaskSentence;
  out += square_list;
  return out;
}

std::optional<ParsedInstruction> parse_instruction(std::string_view instruction) {
  ParsedInstruction parsed;
  const std::string goal_prefix = std::string(kGoalSentence) + " ";
  if (instruction.substr(0, goal_prefix.size()) == goal_prefix) {
    parsed.goal_sentence = true;
    instruction.remove_prefix(goal_prefix.size());
  }
  if (instruction.substr(0, kTaskSentence.size()) != kTaskSentence) return std::nullopt;
  instruction.remove_prefix(kTaskSentence.size());
  parsed.board = std::string(instruction);
  return parsed;
}

std::string render_prompt(std::string_view instruction, std::optional<std::string_view> output) {
  std::string out(kPromptPreamble);
  out += instruction;
  out += ' ';
  out += kResponseMarker;
  if (output) {
    out += ' ';
    out += *output;
  }
  return out;
}

std::string_view instruction_from_prompt(std::string_view prompt) {
  if (prompt.substr(0, kPromptPreamble.size()) != kPromptPreamble) return prompt;
  prompt.remove_prefix(kPromptPreamble.size());
  const auto marker = prompt.find(std::string(" ") + std::string(kResponseMarker));
  if (marker != std::string_view::npos) prompt = prompt.substr(0, marker);
  return prompt;
}

std::optional<GameState> board_from_prompt(std::string_view prompt) {
  const auto parsed = parse_instruction(instruction_from_prompt(prompt));
  if (!parsed) return std::nullopt;
  try {
    return state_from_placement(parse_square_list(parsed->board, SquareListMode::Lenient));
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string example_to_json_line(const InstructionExample& ex) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  j["instruction"] = ex.instruction;
  j["input"] = "";
  j["output"] = ex.output;
  return j.dump();
}

std::string_view to_string(SourceDataset s) {
  switch (s) {
    case SourceDataset::Wsm: return "WSM";
    case SourceDataset::UniqueWsm: return "Unique-WSM";
    case SourceDataset::NoGoalWsm: return "NoGoal-WSM";
  }
  return "?";
}

std::optional<SourceDataset> parse_source_dataset(std::string_view s) {
  if (s == "WSM") return SourceDataset::Wsm;
  if (s == "Unique-WSM") return SourceDataset::UniqueWsm;
  if (s == "NoGoal-WSM") return SourceDataset::NoGoalWsm;
  return std::nullopt;
}

Pool load_pool(const fs::path& ndjson) {
  std::ifstream in(ndjson, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read pool " + ndjson.string());
  Pool pool;
  Sha256 digest;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    digest.update(line);
    digest.update("\n");
    if (line.empty()) continue;
    try {
      pool.pairs.push_back(pair_from_json_line(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, ndjson.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  pool.digest = digest.hex_digest();
  return pool;
}

bool representable(const BoardMovePair& pair) {
  try {
    const GameState rebuilt = state_from_placement(pair.board.placement());
    return parse_san(rebuilt, pair.san, SanMode::Strict) == pair.move;
  } catch (const Error&) {
    return false;
  }
}

CohortManifest build_cohort(const Pool& pool, const CohortSpec& spec, const fs::path& out_dir) {
  if (!spec.seed) throw Error(ErrorCode::SeedMissing, "cohort '" + spec.name + "' has no seed");
  if (spec.source == SourceDataset::NoGoalWsm && spec.goal_sentence) {
    throw Error(ErrorCode::SchemaError, "NoGoal-WSM cohorts must not carry the goal sentence");
  }

  std::vector<std::size_t> eligible;
  eligible.reserve(pool.pairs.size());
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t duplicates = 0;
  for (std::size_t i = 0; i < pool.pairs.size(); ++i) {
    const auto& p = pool.pairs[i];
    if (p.mover != Color::White) {
      throw Error(ErrorCode::MalformedRecord, "pool record " + std::to_string(i) + " is not a white move");
    }
    if (spec.source == SourceDataset::UniqueWsm && !seen.emplace(render_square_list(p.board), p.san).second) {
      ++duplicates;
      continue;
    }
    if (representable(p)) eligible.push_back(i);
  }
  if (spec.size + spec.test_size > eligible.size()) {
    throw Error(ErrorCode::InsufficientPool,
                "cohort '" + spec.name + "' needs " + std::to_string(spec.size + spec.test_size) +
                    " records, pool has " + std::to_string(eligible.size()));
  }

  const auto draws = sample_without_replacement(eligible.size(), spec.test_size + spec.size, *spec.seed);

  fs::create_directories(out_dir);
  const std::string stem = spec.name;
  std::string train_ndjson, test_ndjson, train_ids, test_ids;
  nlohmann::ordered_json train_array = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const std::size_t record = eligible[draws[k]];
    const auto ex = example_for(pool.pairs[record], record, spec.goal_sentence);
    const std::string line = example_to_json_line(ex) + "\n";
    nlohmann::ordered_json id = nlohmann::ordered_json::object();
    id["record"] = record;
    id["game"] = ex.meta.game_id;
    id["ply"] = ex.meta.ply;
    const std::string id_line = id.dump() + "\n";
    if (k < spec.test_size) {
      test_ndjson += line;
      test_ids += id_line;
    } else {
      train_ndjson += line;
      train_ids += id_line;
      nlohmann::ordered_json row = nlohmann::ordered_json::object();
      row["instruction"] = ex.instruction;
      row["input"] = "";
      row["output"] = ex.output;
      train_array.push_back(std::move(row));
    }
  }

  CohortManifest m;
  m.spec = spec;
  m.train_count = spec.size;
  m.test_count = spec.test_size;
  m.pool_size = pool.pairs.size();
  m.excluded_duplicates = duplicates;
  m.excluded_unrepresentable = pool.pairs.size() - duplicates - eligible.size();
  m.pool_digest = pool.digest;
  m.rng_algorithm = std::string(DeterministicRng::kAlgorithm);
  m.created = utc_now();

  const std::vector<std::pair<std::string, std::string>> files = {
      {stem + ".train.ndjson", train_ndjson},
      {stem + ".test.ndjson", test_ndjson},
      {stem + ".train.json", train_array.dump(1) + "\n"},
      {stem + ".train.ids.ndjson", train_ids},
      {stem + ".test.ids.ndjson", test_ids},
  };
  for (const auto& [name, content] : files) {
    write_file(out_dir / name, content);
    m.digests[name] = sha256_hex(content);
  }
  write_file(out_dir / (stem + ".manifest.json"), manifest_to_json(m));
  return m;
}

std::vector<CohortManifest> build_cohort_ladder(const Pool& pool, const CohortSpec& base,
                                                const std::vector<std::size_t>& sizes,
                                                const fs::path& out_dir) {
  std::size_t eligible = 0;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pool.pairs) {
    if (base.source == SourceDataset::UniqueWsm && !seen.emplace(render_square_list(p.board), p.san).second) continue;
    eligible += representable(p) ? 1 : 0;
  }
  if (eligible <= base.test_size) {
    throw Error(ErrorCode::InsufficientPool, "pool of " + std::to_string(eligible) +
                                                 " cannot hold a test set of " + std::to_string(base.test_size));
  }
  std::vector<CohortManifest> out;
  for (std::size_t size : sizes) {
    CohortSpec spec = base;
    spec.name = base.name + "-" + std::to_string(size);
    std::string warning;
    if (size + base.test_size > eligible) {
      spec.size = eligible - base.test_size;
      warning = "requested " + std::to_string(size) + " training records, pool allows " +
                std::to_string(spec.size);
    } else {
      spec.size = size;
    }
    CohortManifest m = build_cohort(pool, spec, out_dir);
    if (!warning.empty()) {
      m.warnings.push_back(warning);
      write_file(out_dir / (spec.name + ".manifest.json"), manifest_to_json(m));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string manifest_to_json(const CohortManifest& m) {
  json j = json::object();
  j["spec"] = spec_to_json(m.spec);
  j["digests"] = m.digests;
  j["counts"] = {{"train", m.train_count},
                 {"test", m.test_count},
                 {"pool", m.pool_size},
                 {"excluded_unrepresentable", m.excluded_unrepresentable},
                 {"excluded_duplicates", m.excluded_duplicates}};
  j["pool_digest"] = m.pool_digest;
  j["rng"] = m.rng_algorithm;
  j["template_version"] = m.template_version;
  j["created"] = m.created;
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

std::string LintReport::to_json() const {
  json j = json::object();
  j["records"] = records;
  j["empty_instructions"] = empty_instructions;
  j["duplicate_rate"] = duplicate_rate;
  json hist = json::object();
  for (const auto& [pieces, n] : piece_counts) hist[std::to_string(pieces)] = n;
  j["piece_counts"] = hist;
  json v = json::array();
  for (const auto& x : violations) {
    v.push_back({{"file", x.file}, {"line", x.line}, {"code", x.code}, {"detail", x.detail}});
  }
  j["violations"] = v;
  j["ok"] = ok();
  return j.dump(2) + "\n";
}

LintReport validate_cohort(const std::vector<fs::path>& files) {
  LintReport report;
  std::set<std::pair<std::string, std::string>> seen;

  auto check = [&](const std::string& file, std::size_t line, const json& row) {
    ++report.records;
    auto violation = [&](std::string code, std::string detail) {
      report.violations.push_back({file, line, std::move(code), std::move(detail)});
    };
    if (!row.is_object() || !row.contains("instruction") || !row.contains("output") ||
        !row["instruction"].is_string() || !row["output"].is_string()) {
      violation("malformed-record", "expected string fields instruction and output");
      return;
    }
    if (row.contains("input") && row["input"] != "") violation("malformed-record", "input must be empty");
    const auto instruction = row["instruction"].get<std::string>();
    const auto output = row["output"].get<std::string>();
    if (instruction.empty()) {
      ++report.empty_instructions;
      violation("empty-instruction", "instruction slot is empty");
      return;
    }
    const auto parsed = parse_instruction(instruction);
    if (!parsed) {
      violation("malformed-record", "instruction does not follow the template");
      return;
    }
    seen.emplace(parsed->board, output);
    try {
      const Placement placement = parse_square_list(parsed->board, SquareListMode::Strict);
      report.piece_counts[placement.count()]++;
      const GameState board = state_from_placement(placement);
      parse_san(board, output, SanMode::Strict);
    } catch (const Error& e) {
      violation(std::string(to_string(e.code())), e.what());
    }
  };

  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      report.violations.push_back({path.string(), 0, "io-error", "cannot read"});
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && content[first] == '[') {
      try {
        const json arr = json::parse(content);
        std::size_t i = 0;
        for (const auto& row : arr) check(path.string(), ++i, row);
      } catch (const json::exception& e) {
        report.violations.push_back({path.string(), 0, "malformed-record", e.what()});
      }
      continue;
    }
    std::istringstream lines(content);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        check(path.string(), n, json::parse(line));
      } catch (const json::exception& e) {
        ++report.records;
        report.violations.push_back({path.string(), n, "malformed-record", e.what()});
      }
    }
  }
  if (report.records) {
    report.duplicate_rate = 1.0 - static_cast<double>(seen.size()) / static_cast<double>(report.records);
  }
  return report;
}

}  // namespace royalgame
