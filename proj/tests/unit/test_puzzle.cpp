#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/puzzle.hpp"

using namespace royalgame;

namespace {

std::vector<std::string> san_list(const GameState& s, const std::vector<Move>& moves) {
  std::vector<std::string> out;
  for (const Move& m : moves) out.push_back(render_san(s, m));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

ErrorCode solve_error(std::string_view fen) {
  try {
    solve_one_ply(fen);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted " << fen;
  return ErrorCode::Io;
}

}  // namespace

TEST(Solver, BackRankMate) {
  const GameState s = parse_fen("6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1");
  const auto sol = solve_one_ply(s);
  EXPECT_EQ(san_list(s, sol.mates), (std::vector<std::string>{"Re8#"}));
  EXPECT_TRUE(sol.checks.empty());
  EXPECT_TRUE(sol.solvable());
  EXPECT_EQ(sol.mates.size() + sol.checks.size() + sol.quiet.size(), legal_moves(s).size());
}

TEST(Solver, InitialPositionHasNothing) {
  const auto sol = solve_one_ply(kInitialFen);
  EXPECT_TRUE(sol.mates.empty());
  EXPECT_TRUE(sol.checks.empty());
  EXPECT_EQ(sol.quiet.size(), 20u);
  EXPECT_FALSE(sol.solvable());
}

TEST(Solver, RejectsBadBoards) {
  EXPECT_EQ(solve_error("4k3/8/8/8/8/8/8/4K3 b - - 0 1"), ErrorCode::InvalidBoard);
  EXPECT_EQ(solve_error("garbage"), ErrorCode::InvalidBoard);
  EXPECT_EQ(solve_error("4k3/8/8/8/8/8/8/4KK2 w - - 0 1"), ErrorCode::InvalidBoard);
}

TEST(Solver, AcceptsEpd) {
  const auto sol = solve_one_ply("6k1/5ppp/8/8/8/8/8/4R1K1 w - - bm Re8#; id \"back rank\";");
  EXPECT_EQ(sol.mates.size(), 1u);
}

// Mates and checks frozen from an independent move generator.
TEST(Solver, MatchesFrozenReference) {
  std::ifstream in(ROYALGAME_GOLDEN "/positions.tsv");
  ASSERT_TRUE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    ASSERT_EQ(cols.size(), 4u) << line;
    const GameState s = parse_fen(cols[0]);
    if (s.side_to_move() != Color::White) continue;
    const auto sol = solve_one_ply(s);
    EXPECT_EQ(san_list(s, sol.mates), words(cols[2])) << cols[0];
    EXPECT_EQ(san_list(s, sol.checks), words(cols[3])) << cols[0];
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Puzzle, MakeRequiresSolvable) {
  const auto p = make_puzzle(parse_fen("6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1"), "br");
  EXPECT_EQ(p.piece_count, 6);
  EXPECT_EQ(p.black_king_square.name(), "g8");
  try {
    make_puzzle(GameState::initial(), "init");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsolvableInstance);
  }
}

TEST(Puzzle, JsonRoundTrip) {
  const auto p = make_puzzle(parse_fen("6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1"), "br");
  const std::string line = puzzle_to_json_line(p);
  EXPECT_EQ(line,
            R"({"id":"br","fen":"6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1","mate":["Re8#"],"check":[],"pieces":6,"black_king":"g8"})");
  const auto back = puzzle_from_json_line(line);
  EXPECT_EQ(back.id, "br");
  EXPECT_EQ(back.board, p.board);
  EXPECT_EQ(back.mates, p.mates);
  EXPECT_EQ(puzzle_digest(back), puzzle_digest(p));
}

TEST(Import, FenLinesWithDiagnostics) {
  std::istringstream in(
      "# comment\n"
      "6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1\n"
      "\n"
      "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1\n"
      "not a fen\n"
      "6k1/5ppp/8/8/8/8/8/4R1K1 b - - 0 1\n"
      "6k1/5ppp/8/8/8/8/8/4R1K1 w - - bm Re8#;\n");
  const auto r = import_puzzles(in, "lines");
  ASSERT_EQ(r.instances.size(), 2u);
  ASSERT_EQ(r.diagnostics.size(), 3u);
  EXPECT_EQ(r.diagnostics[0].code, ErrorCode::UnsolvableInstance);
  EXPECT_EQ(r.diagnostics[1].code, ErrorCode::MalformedRecord);
  EXPECT_EQ(r.diagnostics[2].code, ErrorCode::MalformedRecord);
  EXPECT_NE(r.instances[0].id, r.instances[1].id);
}

TEST(Import, Ndjson) {
  std::istringstream in(
      R"({"id":"a","fen":"6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1"})" "\n"
      R"({"fen":"6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1"})" "\n"
      R"({"id":"c"})" "\n");
  const auto r = import_puzzles(in, "nd");
  ASSERT_EQ(r.instances.size(), 2u);
  EXPECT_EQ(r.instances[0].id, "a");
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].record, 3u);
}

TEST(Import, Pgn) {
  std::istringstream in(
      "[Event \"p\"]\n[SetUp \"1\"]\n[FEN \"6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1\"]\n\n*\n\n"
      "[Event \"no fen\"]\n\n1. e4 *\n");
  const auto r = import_puzzles(in, "pgn");
  EXPECT_EQ(r.instances.size(), 1u);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].code, ErrorCode::MalformedRecord);
}

TEST(Generate, DeterministicUniqueAndWithinConstraints) {
  PuzzleConstraints c;
  c.min_pieces = 4;
  c.max_pieces = 20;
  const auto a = generate_puzzles(7, 60, c);
  const auto b = generate_puzzles(7, 60, c);
  ASSERT_EQ(a.size(), 60u);
  std::set<std::string> boards;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(puzzle_to_json_line(a[i]), puzzle_to_json_line(b[i]));
    EXPECT_GE(a[i].piece_count, 4);
    EXPECT_LE(a[i].piece_count, 20);
    EXPECT_EQ(a[i].board.side_to_move(), Color::White);
    EXPECT_FALSE(a[i].board.en_passant());
    EXPECT_EQ(state_from_placement(a[i].board.placement()).castling(), a[i].board.castling());
    const auto sol = solve_one_ply(a[i].board);
    EXPECT_EQ(sol.mates, a[i].mates);
    EXPECT_EQ(sol.checks, a[i].checks);
    EXPECT_TRUE(boards.insert(render_square_list(a[i].board)).second);
  }
  EXPECT_NE(puzzle_to_json_line(generate_puzzles(8, 1, c)[0]), puzzle_to_json_line(a[0]));
}

TEST(Generate, RequireMate) {
  PuzzleConstraints c;
  c.require_mate = true;
  for (const auto& p : generate_puzzles(3, 5, c)) EXPECT_FALSE(p.mates.empty());
}

TEST(Generate, Errors) {
  PuzzleConstraints bad;
  bad.min_pieces = 10;
  bad.max_pieces = 5;
  try {
    generate_puzzles(1, 1, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  }
  PuzzleConstraints few;
  few.max_attempts = 2;
  try {
    generate_puzzles(1, 50, few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GenerationExhausted);
  }
}

TEST(Stats, Summaries) {
  const auto ps = generate_puzzles(11, 40);
  const auto s = compute_puzzle_stats(ps);
  EXPECT_EQ(s.count, 40u);
  EXPECT_GE(s.min_pieces, 3);
  EXPECT_LE(s.max_pieces, 32);
  EXPECT_GT(s.distinct_black_king_squares, 1u);
  EXPECT_NEAR(s.mean_per_kind[static_cast<int>(PieceKind::King)], 2.0, 1e-12);
  EXPECT_FALSE(s.report().empty());
  EXPECT_NE(s.to_json().find("\"count\""), std::string::npos);
}
