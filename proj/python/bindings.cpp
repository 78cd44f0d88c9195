#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "royalgame/baselines.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/error.hpp"
#include "royalgame/harness.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/pgn.hpp"
#include "royalgame/pipeline.hpp"
#include "royalgame/puzzle.hpp"

namespace py = pybind11;
using namespace royalgame;

namespace {

std::vector<std::string> to_san(const GameState& s, const std::vector<Move>& moves) {
  std::vector<std::string> out;
  for (const Move& m : moves) out.push_back(render_san(s, m));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chess rules, datasets, puzzles and evaluation harness";
  m.attr("__version__") = std::string(kLibraryVersion);
  m.attr("PROTOCOL_VERSION") = std::string(kProtocolVersion);
  m.attr("INITIAL_FEN") = std::string(kInitialFen);

  // Messages start with the kebab-case error code, e.g. "illegal-move: ...".
  py::register_exception<Error>(m, "RoyalgameError", PyExc_ValueError);

  m.def("perft", [](const std::string& fen, int depth) { return perft(parse_fen(fen), depth); },
        py::arg("fen"), py::arg("depth"));
  m.def("legal_moves", [](const std::string& fen) {
    const GameState s = parse_fen(fen);
    return to_san(s, legal_moves(s));
  }, py::arg("fen"), "Legal moves in SAN, ordered by origin, destination, promotion.");
  m.def("normalize_fen", [](const std::string& fen) { return render_fen(parse_fen(fen)); }, py::arg("fen"));
  m.def("push_san", [](const std::string& fen, const std::string& san, bool strict) {
    const GameState s = parse_fen(fen);
    return render_fen(apply_move(s, parse_san(s, san, strict ? SanMode::Strict : SanMode::Lenient)));
  }, py::arg("fen"), py::arg("san"), py::arg("strict") = true);
  m.def("san_to_uci", [](const std::string& fen, const std::string& san) {
    const GameState s = parse_fen(fen);
    return parse_san(s, san, SanMode::Lenient).uci();
  }, py::arg("fen"), py::arg("san"));
  m.def("status", [](const std::string& fen) { return std::string(to_string(status(parse_fen(fen)))); },
        py::arg("fen"));
  m.def("square_list", [](const std::string& fen) { return render_square_list(parse_fen(fen)); }, py::arg("fen"));
  m.def("board_from_square_list", [](const std::string& text) {
    return render_fen(state_from_placement(parse_square_list(text, SquareListMode::Lenient)));
  }, py::arg("text"));

  m.def("make_instruction", &make_instruction, py::arg("square_list"), py::arg("goal_sentence") = true);
  m.def("render_prompt", [](const std::string& instruction, std::optional<std::string> output) {
    return output ? render_prompt(instruction, std::string_view(*output)) : render_prompt(instruction);
  }, py::arg("instruction"), py::arg("output") = py::none());

  m.def("extract_pairs", [](const std::string& pgn, bool white_only) {
    const PgnParseResult parsed = parse_pgn_text(pgn);
    std::vector<std::string> lines;
    for (const auto& p : extract_pairs(parsed.games, white_only ? PairFilter::WhiteOnly : PairFilter::All)) {
      lines.push_back(pair_to_json_line(p));
    }
    std::vector<std::string> diagnostics;
    for (const auto& d : parsed.diagnostics) diagnostics.push_back(d.message);
    return py::make_tuple(lines, diagnostics);
  }, py::arg("pgn"), py::arg("white_only") = true,
     "Returns (pair JSON lines, diagnostics) for the games in a PGN string.");

  m.def("solve_one_ply", [](const std::string& fen) {
    const GameState s = parse_fen(fen);
    const OnePlySolution sol = solve_one_ply(s);
    py::dict d;
    d["mate"] = to_san(s, sol.mates);
    d["check"] = to_san(s, sol.checks);
    d["quiet"] = to_san(s, sol.quiet);
    return d;
  }, py::arg("fen"));
  m.def("generate_puzzles", [](std::uint64_t seed, std::size_t count, int min_pieces, int max_pieces,
                               bool require_mate) {
    PuzzleConstraints c;
    c.min_pieces = min_pieces;
    c.max_pieces = max_pieces;
    c.require_mate = require_mate;
    std::vector<std::string> lines;
    for (const auto& p : generate_puzzles(seed, count, c)) lines.push_back(puzzle_to_json_line(p));
    return lines;
  }, py::arg("seed"), py::arg("count"), py::arg("min_pieces") = 3, py::arg("max_pieces") = 32,
     py::arg("require_mate") = false);

  m.def("extract_move", &extract_move, py::arg("raw"));
  m.def("classify", [](const std::string& fen, std::optional<std::string> token) {
    const Classification c = classify(parse_fen(fen), token ? std::optional<std::string_view>(*token) : std::nullopt);
    return py::make_tuple(std::string(to_string(c.label)), c.would_check_or_mate);
  }, py::arg("fen"), py::arg("token"));

  m.def("random_legal_policy", [](const std::string& fen, std::uint64_t seed) {
    return random_legal_policy(parse_fen(fen), seed);
  }, py::arg("fen"), py::arg("seed") = 0);
  m.def("greedy_solver_policy", [](const std::string& fen) { return greedy_solver_policy(parse_fen(fen)); },
        py::arg("fen"));

  m.def("evaluate", [](const std::string& dataset, const std::string& endpoint, const std::string& mode,
                       double temperature, int max_retries, bool goal_sentence) {
    EvalProtocol p;
    p.mode = parse_eval_mode(mode);
    p.temperature = temperature;
    p.max_retries = max_retries;
    py::gil_scoped_release release;
    return evaluate(load_eval_dataset(dataset, goal_sentence), endpoint_from_spec(endpoint), p).report.to_json();
  }, py::arg("dataset"), py::arg("endpoint"), py::arg("mode") = "single", py::arg("temperature") = 1.0,
     py::arg("max_retries") = 100, py::arg("goal_sentence") = true, "Returns the report as JSON text.");

  m.def("run_pipeline", [](const std::string& config) {
    py::gil_scoped_release release;
    return run_pipeline(config).exit_code();
  }, py::arg("config"));
}
