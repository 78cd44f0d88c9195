#include "royalgame/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "royalgame/baselines.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/digest.hpp"
#include "royalgame/error.hpp"
#include "royalgame/harness.hpp"
#include "royalgame/puzzle.hpp"

namespace royalgame {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class FieldType { String, Bool, Int, Number, StringArray, IntArray, NumberArray };

using SectionSchema = std::map<std::string, FieldType>;

const std::map<std::string, SectionSchema>& section_schemas() {
  static const std::map<std::string, SectionSchema> schemas = {
      {"ingest",
       {{"inputs", FieldType::StringArray},
        {"filter", FieldType::String},
        {"dedupe", FieldType::Bool},
        {"out", FieldType::String},
        {"stats_dir", FieldType::String}}},
      {"cohorts",
       {{"pool", FieldType::String},
        {"name", FieldType::String},
        {"source", FieldType::String},
        {"sizes", FieldType::IntArray},
        {"seed", FieldType::Int},
        {"test_size", FieldType::Int},
        {"goal_sentence", FieldType::Bool},
        {"out", FieldType::String}}},
      {"puzzles",
       {{"mode", FieldType::String},
        {"input", FieldType::String},
        {"seed", FieldType::Int},
        {"count", FieldType::Int},
        {"min_pieces", FieldType::Int},
        {"max_pieces", FieldType::Int},
        {"require_mate", FieldType::Bool},
        {"max_attempts", FieldType::Int},
        {"out", FieldType::String}}},
      {"eval",
       {{"dataset", FieldType::String},
        {"endpoint", FieldType::String},
        {"mode", FieldType::String},
        {"temperature", FieldType::Number},
        {"max_retries", FieldType::Int},
        {"timeout_ms", FieldType::Int},
        {"concurrency", FieldType::Int},
        {"goal_sentence", FieldType::Bool},
        {"out", FieldType::String}}},
      {"sweep",
       {{"dataset", FieldType::String},
        {"endpoint", FieldType::String},
        {"temperatures", FieldType::NumberArray},
        {"max_retries", FieldType::Int},
        {"timeout_ms", FieldType::Int},
        {"concurrency", FieldType::Int},
        {"goal_sentence", FieldType::Bool},
        {"out", FieldType::String}}},
  };
  return schemas;
}

const std::vector<std::string> kStageOrder = {"ingest", "cohorts", "puzzles", "eval", "sweep"};

bool has_type(const json& v, FieldType t) {
  auto all_of = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (t) {
    case FieldType::String: return v.is_string();
    case FieldType::Bool: return v.is_boolean();
    case FieldType::Int: return v.is_number_integer();
    case FieldType::Number: return v.is_number();
    case FieldType::StringArray: return all_of([](const json& e) { return e.is_string(); });
    case FieldType::IntArray: return all_of([](const json& e) { return e.is_number_integer() && e.get<long long>() > 0; });
    case FieldType::NumberArray: return all_of([](const json& e) { return e.is_number(); });
  }
  return false;
}

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgn") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::Io, "no such input " + in.string());
    }
  }
  return files;
}

// Per-run context: config directory for path resolution and workdir for state files.
struct Context {
  fs::path base;
  fs::path workdir;
  json config;

  fs::path resolve(const std::string& p) const { return fs::path(p).is_absolute() ? fs::path(p) : base / p; }
  const json& section(const std::string& name) const {
    static const json empty = json::object();
    return config.contains(name) ? config[name] : empty;
  }
};

struct StageRun {
  std::vector<fs::path> inputs;   // files whose digests enter the fingerprint
  std::vector<fs::path> outputs;  // files written
  std::string detail;
  bool lint_violation = false;
};

std::map<std::string, std::string> digests_of(const std::vector<fs::path>& files) {
  std::map<std::string, std::string> out;
  for (const auto& f : files) out[f.string()] = fs::exists(f) ? sha256_file(f) : "";
  return out;
}

std::vector<fs::path> stage_inputs(const Context& ctx, const std::string& stage) {
  const json& s = ctx.section(stage);
  std::vector<fs::path> in;
  if (stage == "ingest") {
    std::vector<fs::path> raw;
    for (const auto& p : s.value("inputs", std::vector<std::string>{})) raw.push_back(ctx.resolve(p));
    return expand_inputs(raw);
  }
  if (stage == "cohorts") {
    in.push_back(s.contains("pool") ? ctx.resolve(s["pool"]) : ctx.workdir / "pairs.ndjson");
  } else if (stage == "puzzles") {
    if (s.value("mode", "generate") == "import") in.push_back(ctx.resolve(s.at("input").get<std::string>()));
  } else {
    in.push_back(ctx.resolve(s.at("dataset").get<std::string>()));
  }
  return in;
}

StageRun run_ingest(const Context& ctx) {
  const json& s = ctx.section("ingest");
  StageRun run;
  run.inputs = stage_inputs(ctx, "ingest");
  const std::string filter = s.value("filter", "white");
  const IngestResult r = ingest_pgn_files(run.inputs, filter == "all" ? PairFilter::All : PairFilter::WhiteOnly,
                                          s.value("dedupe", false));
  const fs::path out = s.contains("out") ? ctx.resolve(s["out"]) : ctx.workdir / "pairs.ndjson";
  const fs::path stats_dir = s.contains("stats_dir") ? ctx.resolve(s["stats_dir"]) : ctx.workdir / "stats";
  write_pairs(r.pairs, out);
  fs::create_directories(stats_dir);
  write_stats_csv(r.stats, stats_dir.string());
  std::string diag;
  for (const auto& d : r.diagnostics) diag += d.source + " game " + std::to_string(d.game_index) + ": " + d.message + "\n";
  write_text(ctx.workdir / "ingest.diagnostics.txt", diag);
  run.outputs = {out, stats_dir / "summary.csv", stats_dir / "top_moves.csv", stats_dir / "top_boards.csv",
                 stats_dir / "players.csv", ctx.workdir / "ingest.diagnostics.txt"};
  run.detail = std::to_string(r.games.size()) + " games, " + std::to_string(r.pairs.size()) + " pairs, " +
               std::to_string(r.diagnostics.size()) + " skipped";
  return run;
}

StageRun run_cohorts(const Context& ctx) {
  const json& s = ctx.section("cohorts");
  StageRun run;
  run.inputs = stage_inputs(ctx, "cohorts");
  if (!fs::exists(run.inputs.front())) throw Error(ErrorCode::Io, "pool file " + run.inputs.front().string() + " missing");
  CohortSpec spec;
  spec.name = s.value("name", "wsm");
  const auto source = parse_source_dataset(s.value("source", "WSM"));
  if (!source) schema_error("cohorts.source must be WSM, Unique-WSM or NoGoal-WSM");
  spec.source = *source;
  spec.seed = s.value("seed", std::uint64_t{41});
  spec.test_size = s.value("test_size", std::size_t{10000});
  spec.goal_sentence = s.value("goal_sentence", spec.source != SourceDataset::NoGoalWsm);
  const auto sizes = s.value("sizes", std::vector<std::size_t>{1000});
  const fs::path out = s.contains("out") ? ctx.resolve(s["out"]) : ctx.workdir / "cohorts";

  const Pool pool = load_pool(run.inputs.front());
  const auto manifests = build_cohort_ladder(pool, spec, sizes, out);
  std::vector<fs::path> lint_inputs;
  for (const auto& m : manifests) {
    for (const auto& [name, digest] : m.digests) run.outputs.push_back(out / name);
    run.outputs.push_back(out / (m.spec.name + ".manifest.json"));
    lint_inputs.push_back(out / (m.spec.name + ".train.ndjson"));
    lint_inputs.push_back(out / (m.spec.name + ".test.ndjson"));
  }
  const LintReport lint = validate_cohort(lint_inputs);
  write_text(out / "lint.json", lint.to_json() + "\n");
  run.outputs.push_back(out / "lint.json");
  run.lint_violation = !lint.ok();
  run.detail = std::to_string(manifests.size()) + " cohorts, " + std::to_string(lint.violations.size()) +
               " lint violations";
  return run;
}

StageRun run_puzzles(const Context& ctx) {
  const json& s = ctx.section("puzzles");
  StageRun run;
  run.inputs = stage_inputs(ctx, "puzzles");
  const fs::path out = s.contains("out") ? ctx.resolve(s["out"]) : ctx.workdir / "puzzles.ndjson";
  std::vector<PuzzleInstance> puzzles;
  std::string detail;
  if (s.value("mode", "generate") == "import") {
    std::ifstream in(run.inputs.front());
    if (!in) throw Error(ErrorCode::Io, "cannot read " + run.inputs.front().string());
    PuzzleImport imp = import_puzzles(in, run.inputs.front().filename().string());
    puzzles = std::move(imp.instances);
    detail = std::to_string(imp.diagnostics.size()) + " rejected";
  } else {
    PuzzleConstraints c;
    c.min_pieces = s.value("min_pieces", c.min_pieces);
    c.max_pieces = s.value("max_pieces", c.max_pieces);
    c.require_mate = s.value("require_mate", c.require_mate);
    c.max_attempts = s.value("max_attempts", c.max_attempts);
    puzzles = generate_puzzles(s.value("seed", std::uint64_t{41}), s.value("count", std::size_t{1000}), c);
  }
  std::string lines;
  for (const auto& p : puzzles) lines += puzzle_to_json_line(p) + "\n";
  write_text(out, lines);
  fs::path stats = out;
  stats.replace_extension(".stats.json");
  const PuzzleSetStats st = compute_puzzle_stats(puzzles);
  write_text(stats, st.to_json() + "\n");
  run.outputs = {out, stats};
  run.detail = st.report() + (detail.empty() ? "" : " " + detail);
  return run;
}

EvalProtocol protocol_from(const json& s) {
  EvalProtocol p;
  p.mode = parse_eval_mode(s.value("mode", "single"));
  p.temperature = s.value("temperature", 1.0);
  p.max_retries = s.value("max_retries", 100);
  p.timeout = std::chrono::milliseconds(s.value("timeout_ms", 10000));
  p.concurrency = s.value("concurrency", 1);
  return p;
}

StageRun run_eval(const Context& ctx) {
  const json& s = ctx.section("eval");
  StageRun run;
  run.inputs = stage_inputs(ctx, "eval");
  const auto dataset = load_eval_dataset(run.inputs.front(), s.value("goal_sentence", true));
  const auto factory = endpoint_from_spec(s.at("endpoint").get<std::string>(), ctx.base);
  const EvalOutcome outcome = evaluate(dataset, factory, protocol_from(s));
  const fs::path out = s.contains("out") ? ctx.resolve(s["out"]) : ctx.workdir / "eval";
  write_eval_outputs(outcome, out);
  run.outputs = {out / "report.json", out / "plotdata.csv"};
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu attempted, %zu errored, %.2f%% legal, %.2f%% legal check/mate",
                outcome.report.attempted, outcome.report.errored, outcome.report.legal_pct,
                outcome.report.legal_check_mate_pct);
  run.detail = buf;
  return run;
}

StageRun run_sweep(const Context& ctx) {
  const json& s = ctx.section("sweep");
  StageRun run;
  run.inputs = stage_inputs(ctx, "sweep");
  const auto dataset = load_eval_dataset(run.inputs.front(), s.value("goal_sentence", true));
  const auto factory = endpoint_from_spec(s.at("endpoint").get<std::string>(), ctx.base);
  json base = s;
  base["mode"] = "retry";
  const auto points = sweep_temperature(dataset, factory, protocol_from(base), s.at("temperatures").get<std::vector<double>>());
  const fs::path out = s.contains("out") ? ctx.resolve(s["out"]) : ctx.workdir / "sweep";
  write_text(out / "sweep.csv", sweep_csv(points));
  run.outputs = {out / "sweep.csv"};
  run.detail = std::to_string(points.size()) + " temperatures";
  return run;
}

std::string fingerprint(const Context& ctx, const std::string& stage, const std::vector<fs::path>& inputs) {
  Sha256 h;
  h.update(stage);
  h.update("\n");
  h.update(ctx.section(stage).dump());
  h.update("\n");
  for (const auto& [path, digest] : digests_of(inputs)) h.update(path + "=" + digest + "\n");
  return h.hex_digest();
}

void journal(const Context& ctx, const StageOutcome& o) {
  ordered_json j;
  j["time"] = utc_now();
  j["stage"] = o.stage;
  j["status"] = o.status;
  j["detail"] = o.detail;
  fs::create_directories(ctx.workdir);
  std::ofstream out(ctx.workdir / "journal.ndjson", std::ios::app);
  out << j.dump() << "\n";
}

}  // namespace

IngestResult ingest_pgn_files(const std::vector<fs::path>& inputs, PairFilter filter, bool dedupe) {
  IngestResult r;
  for (const auto& file : expand_inputs(inputs)) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + file.string());
    PgnParseResult parsed = parse_pgn_stream(in, file.filename().string());
    for (auto& g : parsed.games) r.games.push_back(std::move(g));
    for (auto& d : parsed.diagnostics) r.diagnostics.push_back(std::move(d));
  }
  r.all_pairs = extract_pairs(r.games, PairFilter::All);
  for (const auto& p : r.all_pairs) {
    if (filter == PairFilter::All || p.mover == Color::White) r.pairs.push_back(p);
  }
  if (dedupe) r.pairs = dedupe_pairs(r.pairs);
  r.stats = compute_stats(r.all_pairs, r.games);
  return r;
}

void write_pairs(const std::vector<BoardMovePair>& pairs, const fs::path& ndjson) {
  std::string text;
  for (const auto& p : pairs) text += pair_to_json_line(p) + "\n";
  write_text(ndjson, text);
}

EndpointFactory endpoint_from_spec(std::string_view spec, const fs::path& base_dir) {
  if (spec.substr(0, 4) == "cmd:") {
    const std::string command(spec.substr(4));
    return [command] { return make_subprocess_endpoint(command); };
  }
  if (spec.substr(0, 7) == "http://" || spec.substr(0, 8) == "https://") {
    const std::string url(spec);
    return [url] { return make_http_endpoint(url); };
  }
  if (spec.substr(0, 9) == "baseline:") {
    std::vector<std::string> parts;
    std::string rest(spec.substr(9));
    std::istringstream in(rest);
    for (std::string piece; std::getline(in, piece, ':');) parts.push_back(piece);
    if (parts.empty()) schema_error("baseline endpoint needs a policy name");
    PolicyOptions options;
    options.kind = parse_policy_kind(parts[0]);
    try {
      if (options.kind == PolicyKind::Frequency) {
        if (parts.size() < 2) schema_error("baseline:frequency needs a pair file");
        fs::path table = rest.substr(parts[0].size() + 1);
        if (table.is_relative()) table = base_dir / table;
        options.table = std::make_shared<const FrequencyTable>(FrequencyTable::from_file(table));
      } else {
        if (parts.size() > 1) options.seed = std::stoull(parts[1]);
        if (parts.size() > 2) options.p_legal = std::stod(parts[2]);
      }
    } catch (const std::invalid_argument&) {
      schema_error("bad baseline argument in '" + std::string(spec) + "'");
    } catch (const std::out_of_range&) {
      schema_error("bad baseline argument in '" + std::string(spec) + "'");
    }
    auto handler = std::make_shared<const PolicyHandler>(options);
    return [handler] { return make_in_process_endpoint(handler); };
  }
  schema_error("unrecognised endpoint '" + std::string(spec) + "'");
}

void validate_config(std::string_view text) {
  json config;
  try {
    config = json::parse(text);
  } catch (const json::exception& e) {
    schema_error(std::string("config is not JSON: ") + e.what());
  }
  if (!config.is_object()) schema_error("config must be an object");
  static const std::set<std::string> top = {"version", "workdir", "stages", "ingest", "cohorts", "puzzles", "eval", "sweep"};
  for (const auto& [key, value] : config.items()) {
    if (!top.count(key)) schema_error("unknown key '" + key + "'");
  }
  if (!config.contains("version") || config["version"] != 1) schema_error("version must be 1");
  if (config.contains("workdir") && !config["workdir"].is_string()) schema_error("workdir must be a string");
  if (!config.contains("stages") || !has_type(config["stages"], FieldType::StringArray) || config["stages"].empty()) {
    schema_error("stages must be a non-empty array of stage names");
  }
  std::set<std::string> seen;
  for (const auto& st : config["stages"]) {
    const std::string name = st.get<std::string>();
    if (std::find(kStageOrder.begin(), kStageOrder.end(), name) == kStageOrder.end()) {
      schema_error("unknown stage '" + name + "'");
    }
    if (!seen.insert(name).second) schema_error("stage '" + name + "' listed twice");
  }
  for (const auto& [name, schema] : section_schemas()) {
    if (!config.contains(name)) continue;
    const json& s = config[name];
    if (!s.is_object()) schema_error(name + " must be an object");
    for (const auto& [key, value] : s.items()) {
      const auto it = schema.find(key);
      if (it == schema.end()) schema_error("unknown key '" + name + "." + key + "'");
      if (!has_type(value, it->second)) schema_error("wrong type for '" + name + "." + key + "'");
    }
  }
  auto require = [&](const std::string& section, const std::string& key) {
    if (seen.count(section) && !(config.contains(section) && config[section].contains(key))) {
      schema_error(section + "." + key + " is required");
    }
  };
  require("ingest", "inputs");
  require("eval", "dataset");
  require("eval", "endpoint");
  require("sweep", "dataset");
  require("sweep", "endpoint");
  require("sweep", "temperatures");
  if (config.contains("puzzles") && config["puzzles"].value("mode", "generate") == "import") require("puzzles", "input");
  if (config.contains("ingest") && config["ingest"].contains("filter")) {
    const auto f = config["ingest"]["filter"].get<std::string>();
    if (f != "white" && f != "all") schema_error("ingest.filter must be white or all");
  }
  for (const char* section : {"eval", "sweep"}) {
    if (config.contains(section) && config[section].contains("mode")) {
      const auto m = config[section]["mode"].get<std::string>();
      if (m != "single" && m != "retry") schema_error(std::string(section) + ".mode must be single or retry");
    }
  }
  if (config.contains("puzzles") && config["puzzles"].contains("mode")) {
    const auto m = config["puzzles"]["mode"].get<std::string>();
    if (m != "generate" && m != "import") schema_error("puzzles.mode must be generate or import");
  }
}

int PipelineResult::exit_code() const {
  const bool failed = std::any_of(stages.begin(), stages.end(), [](const auto& s) { return s.status == "failed"; });
  return failed || lint_violations ? 1 : 0;
}

PipelineResult run_pipeline(const fs::path& config_file) {
  std::ifstream in(config_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + config_file.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  validate_config(text);

  Context ctx;
  ctx.config = json::parse(text);
  ctx.base = config_file.has_parent_path() ? config_file.parent_path() : fs::path(".");
  ctx.workdir = ctx.resolve(ctx.config.value("workdir", "."));
  fs::create_directories(ctx.workdir / ".state");

  const std::map<std::string, std::function<StageRun(const Context&)>> runners = {
      {"ingest", run_ingest}, {"cohorts", run_cohorts}, {"puzzles", run_puzzles},
      {"eval", run_eval},     {"sweep", run_sweep}};

  PipelineResult result;
  for (const auto& st : ctx.config["stages"]) {
    const std::string stage = st.get<std::string>();
    const fs::path state_file = ctx.workdir / ".state" / (stage + ".json");
    StageOutcome outcome{stage, "ran", ""};
    try {
      const std::string fp = fingerprint(ctx, stage, stage_inputs(ctx, stage));
      bool skip = false;
      bool recorded_lint = false;
      if (fs::exists(state_file)) {
        std::ifstream sf(state_file);
        json state = json::parse(sf, nullptr, false);
        if (!state.is_discarded() && state.value("fingerprint", "") == fp) {
          std::vector<fs::path> outs;
          for (const auto& [path, digest] : state["outputs"].items()) outs.push_back(path);
          skip = digests_of(outs) == state["outputs"].get<std::map<std::string, std::string>>();
          recorded_lint = state.value("lint_violation", false);
        }
      }
      if (skip) {
        outcome.status = "skipped";
        outcome.detail = "outputs match recorded digests";
        result.lint_violations = result.lint_violations || recorded_lint;
      } else {
        const StageRun run = runners.at(stage)(ctx);
        outcome.detail = run.detail;
        result.lint_violations = result.lint_violations || run.lint_violation;
        json state;
        state["fingerprint"] = fingerprint(ctx, stage, run.inputs);
        state["outputs"] = digests_of(run.outputs);
        state["lint_violation"] = run.lint_violation;
        write_text(state_file, state.dump(2) + "\n");
      }
    } catch (const std::exception& e) {
      outcome.status = "failed";
      outcome.detail = Error(ErrorCode::StageFailure, stage + ": " + e.what()).what();
    }
    journal(ctx, outcome);
    result.stages.push_back(outcome);
    if (outcome.status == "failed") break;
  }
  return result;
}

}  // namespace royalgame
