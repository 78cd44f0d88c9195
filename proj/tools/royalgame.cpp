#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "royalgame/baselines.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/error.hpp"
#include "royalgame/harness.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/pipeline.hpp"
#include "royalgame/puzzle.hpp"

namespace fs = std::filesystem;
using namespace royalgame;

namespace {

std::vector<PuzzleInstance> read_puzzles(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<PuzzleInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(puzzle_from_json_line(line));
  }
  return out;
}

void write_puzzles(const std::vector<PuzzleInstance>& puzzles, const std::string& out) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty() && out != "-") {
    file.open(out);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + out);
    os = &file;
  }
  for (const auto& p : puzzles) *os << puzzle_to_json_line(p) << '\n';
}

void print_report(const MetricsReport& r) {
  std::cout << "attempted " << r.attempted << ", errored " << r.errored << "\n";
  for (Label l : kAllLabels) {
    std::printf("  %-20s %6zu  %7.2f%%\n", std::string(to_string(l)).c_str(), r.count(l), r.pct(l));
  }
  std::printf("  legal %.2f%%, legal check/mate %.2f%%, illegal check/mate %.2f%%, absent-piece check/mate %.2f%%\n",
              r.legal_pct, r.legal_check_mate_pct, r.illegal_check_mate_pct, r.piece_absent_check_mate_pct);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chess board/move datasets, check/mate-in-1 problems and move-proposal evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "royalgame " + std::string(kLibraryVersion) + " (protocol " +
                                        std::string(kProtocolVersion) + ")");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Extract board/move pairs from PGN files");
  std::vector<std::string> ingest_in;
  std::string ingest_filter = "white", ingest_out = "pairs.ndjson", ingest_stats;
  bool ingest_dedupe = false;
  ingest->add_option("--in", ingest_in, "PGN files or directories")->required();
  ingest->add_option("--filter", ingest_filter, "white or all")->check(CLI::IsMember({"white", "all"}));
  ingest->add_flag("--dedupe", ingest_dedupe, "Keep the first occurrence of each board/move");
  ingest->add_option("--out", ingest_out, "Pair NDJSON output");
  ingest->add_option("--stats-out", ingest_stats, "Directory for corpus statistics CSVs");

  // build-cohorts
  auto* cohorts = app.add_subcommand("build-cohorts", "Sample seeded train/test cohorts from a pair pool");
  std::string pool_path, cohort_name = "wsm", cohort_source = "WSM", cohort_out = "cohorts";
  std::vector<std::size_t> sizes{1000};
  std::uint64_t cohort_seed = 41;
  std::size_t test_size = 10000;
  bool no_goal = false;
  cohorts->add_option("--pool", pool_path, "Pair NDJSON written by ingest")->required();
  cohorts->add_option("--sizes", sizes, "Training sizes")->delimiter(',');
  cohorts->add_option("--seed", cohort_seed, "Sampling seed");
  cohorts->add_option("--test-size", test_size, "Held-out records");
  cohorts->add_option("--name", cohort_name, "Cohort name prefix");
  cohorts->add_option("--source", cohort_source, "WSM, Unique-WSM or NoGoal-WSM");
  cohorts->add_flag("--no-goal", no_goal, "Omit the goal sentence");
  cohorts->add_option("--out", cohort_out, "Output directory");

  // validate-cohort
  auto* validate = app.add_subcommand("validate-cohort", "Lint cohort files");
  std::vector<std::string> validate_files;
  validate->add_option("files", validate_files, "NDJSON or JSON cohort files")->required();

  // puzzles
  auto* puzzles = app.add_subcommand("puzzles", "Check/mate-in-1 problems");
  puzzles->require_subcommand(1);
  auto* p_import = puzzles->add_subcommand("import", "Import FEN, EPD, PGN or NDJSON problems");
  auto* p_generate = puzzles->add_subcommand("generate", "Generate problems from random playouts");
  auto* p_stats = puzzles->add_subcommand("stats", "Summarise a problem file");
  std::string p_in, p_out = "-";
  std::uint64_t p_seed = 41;
  std::size_t p_count = 1000;
  PuzzleConstraints constraints;
  p_import->add_option("--in", p_in, "Input file")->required();
  p_import->add_option("--out", p_out, "Output NDJSON, - for stdout");
  p_generate->add_option("--seed", p_seed, "Seed");
  p_generate->add_option("--count", p_count, "Number of problems");
  p_generate->add_option("--min-pieces", constraints.min_pieces, "Fewest pieces on the board");
  p_generate->add_option("--max-pieces", constraints.max_pieces, "Most pieces on the board");
  p_generate->add_flag("--require-mate", constraints.require_mate, "Only boards with a mate in one");
  p_generate->add_option("--max-attempts", constraints.max_attempts, "Playout budget");
  p_generate->add_option("--out", p_out, "Output NDJSON, - for stdout");
  p_stats->add_option("--in", p_in, "Problem NDJSON")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score an endpoint on a dataset");
  std::string e_dataset, e_endpoint, e_mode = "single", e_out = "report";
  EvalProtocol e_protocol;
  int timeout_ms = 10000;
  bool e_no_goal = false;
  eval->add_option("--dataset", e_dataset, "NDJSON with fen or instruction fields")->required();
  eval->add_option("--endpoint", e_endpoint, "cmd:..., http://... or baseline:...")->required();
  eval->add_option("--mode", e_mode, "single or retry")->check(CLI::IsMember({"single", "retry"}));
  eval->add_option("--temp", e_protocol.temperature, "Sampling temperature");
  eval->add_option("--max-retries", e_protocol.max_retries, "Attempts per instance in retry mode");
  eval->add_option("--timeout-ms", timeout_ms, "Per-generation timeout");
  eval->add_option("--concurrency", e_protocol.concurrency, "In-flight requests");
  eval->add_flag("--no-goal", e_no_goal, "Omit the goal sentence for FEN datasets");
  eval->add_option("--out", e_out, "Report directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Retry-mode evaluation across temperatures");
  std::vector<double> temps{1.0};
  std::string s_out = "sweep";
  sweep->add_option("--dataset", e_dataset, "Dataset")->required();
  sweep->add_option("--endpoint", e_endpoint, "Endpoint")->required();
  sweep->add_option("--temps", temps, "Temperatures")->delimiter(',');
  sweep->add_option("--max-retries", e_protocol.max_retries, "Attempts per instance");
  sweep->add_option("--timeout-ms", timeout_ms, "Per-generation timeout");
  sweep->add_flag("--no-goal", e_no_goal, "Omit the goal sentence for FEN datasets");
  sweep->add_option("--out", s_out, "Output directory");

  // baseline serve
  auto* baseline = app.add_subcommand("baseline", "Built-in policies");
  baseline->require_subcommand(1);
  auto* serve = baseline->add_subcommand("serve", "Serve a policy over stdio or HTTP");
  std::string policy = "random", table, http;
  std::uint64_t b_seed = 0;
  double p_legal = 0.1;
  serve->add_option("--policy", policy, "random, greedy, frequency or noisy")
      ->check(CLI::IsMember({"random", "greedy", "frequency", "noisy"}));
  serve->add_option("--table", table, "Pair NDJSON for the frequency policy");
  serve->add_option("--seed", b_seed, "Seed for random and noisy");
  serve->add_option("--p-legal", p_legal, "Legal-move probability for noisy");
  serve->add_option("--http", http, "host:port; stdio when absent");

  // run
  auto* run = app.add_subcommand("run", "Run a pipeline config");
  std::string config;
  run->add_option("config", config, "Pipeline JSON config")->required();

  // perft
  auto* perft_cmd = app.add_subcommand("perft", "Count leaf nodes of the legal move tree");
  std::string fen(kInitialFen);
  int depth = 4;
  bool divide = false;
  perft_cmd->add_option("--fen", fen, "Start position");
  perft_cmd->add_option("--depth", depth, "Depth");
  perft_cmd->add_flag("--divide", divide, "Per-move counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      std::vector<fs::path> inputs(ingest_in.begin(), ingest_in.end());
      const IngestResult r =
          ingest_pgn_files(inputs, ingest_filter == "all" ? PairFilter::All : PairFilter::WhiteOnly, ingest_dedupe);
      for (const auto& d : r.diagnostics) {
        std::cerr << d.source << " game " << d.game_index << " (line " << d.line << "): " << d.message << "\n";
      }
      write_pairs(r.pairs, ingest_out);
      if (!ingest_stats.empty()) {
        fs::create_directories(ingest_stats);
        write_stats_csv(r.stats, ingest_stats);
      }
      std::cout << r.games.size() << " games, " << r.diagnostics.size() << " skipped, " << r.pairs.size()
                << " pairs written to " << ingest_out << "\n";
      return 0;
    }
    if (*cohorts) {
      CohortSpec spec;
      spec.name = cohort_name;
      const auto source = parse_source_dataset(cohort_source);
      if (!source) throw Error(ErrorCode::SchemaError, "unknown source " + cohort_source);
      spec.source = no_goal ? SourceDataset::NoGoalWsm : *source;
      spec.seed = cohort_seed;
      spec.test_size = test_size;
      spec.goal_sentence = !no_goal && spec.source != SourceDataset::NoGoalWsm;
      const auto manifests = build_cohort_ladder(load_pool(pool_path), spec, sizes, cohort_out);
      for (const auto& m : manifests) {
        std::cout << m.spec.name << ": " << m.train_count << " train, " << m.test_count << " test\n";
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      }
      return 0;
    }
    if (*validate) {
      std::vector<fs::path> files(validate_files.begin(), validate_files.end());
      const LintReport report = validate_cohort(files);
      std::cout << report.to_json() << "\n";
      return report.ok() ? 0 : 1;
    }
    if (*p_import) {
      std::ifstream in(p_in);
      if (!in) throw Error(ErrorCode::Io, "cannot read " + p_in);
      const PuzzleImport imp = import_puzzles(in, fs::path(p_in).filename().string());
      for (const auto& d : imp.diagnostics) {
        std::cerr << "record " << d.record << ": " << to_string(d.code) << ": " << d.message << "\n";
      }
      write_puzzles(imp.instances, p_out);
      std::cerr << compute_puzzle_stats(imp.instances).report() << "\n";
      return imp.diagnostics.empty() ? 0 : 1;
    }
    if (*p_generate) {
      const auto generated = generate_puzzles(p_seed, p_count, constraints);
      write_puzzles(generated, p_out);
      std::cerr << compute_puzzle_stats(generated).report() << "\n";
      return 0;
    }
    if (*p_stats) {
      const PuzzleSetStats st = compute_puzzle_stats(read_puzzles(p_in));
      std::cout << st.report() << "\n" << st.to_json() << "\n";
      return 0;
    }
    if (*eval || *sweep) {
      e_protocol.mode = parse_eval_mode(e_mode);
      e_protocol.timeout = std::chrono::milliseconds(timeout_ms);
      const auto dataset = load_eval_dataset(e_dataset, !e_no_goal);
      const auto factory = endpoint_from_spec(e_endpoint);
      if (*eval) {
        const EvalOutcome outcome = evaluate(dataset, factory, e_protocol);
        write_eval_outputs(outcome, e_out);
        print_report(outcome.report);
        return 0;
      }
      const auto points = sweep_temperature(dataset, factory, e_protocol, temps);
      fs::create_directories(s_out);
      std::ofstream(fs::path(s_out) / "sweep.csv") << sweep_csv(points);
      std::cout << sweep_csv(points);
      return 0;
    }
    if (*serve) {
      PolicyOptions options;
      options.kind = parse_policy_kind(policy);
      options.seed = b_seed;
      options.p_legal = p_legal;
      if (options.kind == PolicyKind::Frequency) {
        if (table.empty()) throw Error(ErrorCode::EmptyTable, "--table is required for the frequency policy");
        options.table = std::make_shared<const FrequencyTable>(FrequencyTable::from_file(table));
      }
      const PolicyHandler handler(options);
      if (http.empty()) {
        serve_stream(handler, std::cin, std::cout);
      } else {
        const auto colon = http.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::SchemaError, "--http expects host:port");
        serve_http(handler, http.substr(0, colon), std::stoi(http.substr(colon + 1)));
      }
      return 0;
    }
    if (*run) {
      const PipelineResult result = run_pipeline(config);
      for (const auto& s : result.stages) std::cout << s.stage << ": " << s.status << " (" << s.detail << ")\n";
      if (result.lint_violations) std::cout << "lint violations present\n";
      return result.exit_code();
    }
    if (*perft_cmd) {
      const GameState start = parse_fen(fen);
      const auto t0 = std::chrono::steady_clock::now();
      std::uint64_t total = 0;
      if (divide && depth > 0) {
        for (const Move& m : legal_moves(start)) {
          const std::uint64_t n = perft(apply_move_unchecked(start, m), depth - 1);
          std::cout << m.uci() << ": " << n << "\n";
          total += n;
        }
      } else {
        total = perft(start, depth);
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "perft(" << depth << ") = " << total << " in " << secs << " s\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
