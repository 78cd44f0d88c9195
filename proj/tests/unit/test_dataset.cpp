#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/sampling.hpp"

using namespace royalgame;
namespace fs = std::filesystem;

namespace {

// White-to-move pairs from seeded random playouts.
Pool playout_pool(std::size_t games, std::uint64_t seed) {
  Pool pool;
  DeterministicRng rng(seed);
  for (std::size_t g = 0; g < games; ++g) {
    GameState s = GameState::initial();
    for (std::size_t ply = 1; ply <= 40; ++ply) {
      const auto moves = legal_moves(s);
      if (moves.empty()) break;
      const Move m = moves[rng.below(moves.size())];
      if (s.side_to_move() == Color::White) {
        pool.pairs.push_back({s, m, render_san(s, m), Color::White,
                              PairSource{"g#" + std::to_string(g), ply, "W", "B", "test"}});
      }
      s = apply_move_unchecked(s, m);
    }
  }
  return pool;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Prompt, InstructionAndTemplate) {
  const std::string instr = make_instruction("a1:K, c1:k", true);
  EXPECT_EQ(instr,
            "You are a chess Grandmaster and checkmate # is your goal. Predict the next best move on this "
            "SAN chess board: a1:K, c1:k");
  EXPECT_EQ(make_instruction("a1:K, c1:k", false), "Predict the next best move on this SAN chess board: a1:K, c1:k");
  const std::string prompt = render_prompt(instr);
  EXPECT_EQ(prompt,
            "Below is an instruction that describes a task. Write a response that appropriately completes "
            "the request. ### Instruction: " + instr + " ### Response:");
  EXPECT_EQ(render_prompt(instr, std::string_view("Kb2")), prompt + " Kb2");
  EXPECT_EQ(instruction_from_prompt(prompt), instr);
  EXPECT_EQ(instruction_from_prompt(render_prompt(instr, std::string_view("Kb2"))), instr);
  EXPECT_EQ(instruction_from_prompt("plain text"), "plain text");
}

TEST(Prompt, ParseInstruction) {
  const auto goal = parse_instruction(make_instruction("a1:K, c1:k", true));
  ASSERT_TRUE(goal);
  EXPECT_TRUE(goal->goal_sentence);
  EXPECT_EQ(goal->board, "a1:K, c1:k");
  const auto plain = parse_instruction(make_instruction("a1:K, c1:k", false));
  ASSERT_TRUE(plain);
  EXPECT_FALSE(plain->goal_sentence);
  EXPECT_FALSE(parse_instruction("Play a move: a1:K"));
}

TEST(Prompt, BoardFromPrompt) {
  const auto s = board_from_prompt(render_prompt(make_instruction(render_square_list(GameState::initial()), true)));
  ASSERT_TRUE(s);
  EXPECT_EQ(render_fen(*s), kInitialFen);
  EXPECT_FALSE(board_from_prompt(render_prompt(make_instruction("a1:K", true))));
  EXPECT_FALSE(board_from_prompt("nonsense"));
}

TEST(Cohort, RepresentableExcludesEnPassant) {
  const GameState s = parse_fen("4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2");
  const Move ep = parse_san(s, "exd6");
  EXPECT_FALSE(representable({s, ep, "exd6", Color::White, {}}));
  const Move push = parse_san(s, "e6");
  EXPECT_TRUE(representable({s, push, "e6", Color::White, {}}));
}

TEST(Cohort, DeterministicAndDisjoint) {
  const Pool pool = playout_pool(60, 3);
  ASSERT_GT(pool.pairs.size(), 900u);
  TempDir a("royalgame_cohort_a"), b("royalgame_cohort_b");
  CohortSpec spec;
  spec.name = "c";
  spec.size = 300;
  spec.test_size = 200;
  const auto m1 = build_cohort(pool, spec, a.path());
  const auto m2 = build_cohort(pool, spec, b.path());
  EXPECT_EQ(m1.digests, m2.digests);
  EXPECT_EQ(m1.train_count, 300u);
  EXPECT_EQ(m1.test_count, 200u);
  for (const char* f : {"c.train.ndjson", "c.test.ndjson", "c.train.json", "c.train.ids.ndjson",
                        "c.test.ids.ndjson", "c.manifest.json"}) {
    EXPECT_TRUE(fs::exists(a.path() / f)) << f;
  }

  std::set<std::size_t> train, test;
  for (const auto& l : lines_of(a.path() / "c.train.ids.ndjson")) train.insert(nlohmann::json::parse(l)["record"].get<std::size_t>());
  for (const auto& l : lines_of(a.path() / "c.test.ids.ndjson")) test.insert(nlohmann::json::parse(l)["record"].get<std::size_t>());
  EXPECT_EQ(train.size(), 300u);
  EXPECT_EQ(test.size(), 200u);
  for (auto r : train) EXPECT_FALSE(test.count(r));

  spec.seed = 42;
  TempDir c("royalgame_cohort_c");
  EXPECT_NE(build_cohort(pool, spec, c.path()).digests, m1.digests);
}

TEST(Cohort, RecordsFollowTemplate) {
  const Pool pool = playout_pool(20, 5);
  TempDir d("royalgame_cohort_tpl");
  CohortSpec spec;
  spec.name = "t";
  spec.size = 50;
  spec.test_size = 10;
  build_cohort(pool, spec, d.path());
  for (const auto& l : lines_of(d.path() / "t.train.ndjson")) {
    const auto j = nlohmann::json::parse(l);
    EXPECT_EQ(j["input"], "");
    EXPECT_EQ(j["instruction"].get<std::string>().rfind(kGoalSentence, 0), 0u);
  }
  const auto arr = nlohmann::json::parse(slurp(d.path() / "t.train.json"));
  EXPECT_EQ(arr.size(), 50u);

  spec.name = "n";
  spec.source = SourceDataset::NoGoalWsm;
  spec.goal_sentence = false;
  build_cohort(pool, spec, d.path());
  for (const auto& l : lines_of(d.path() / "n.train.ndjson")) {
    EXPECT_EQ(nlohmann::json::parse(l)["instruction"].get<std::string>().rfind(kTaskSentence, 0), 0u);
  }
  const auto report = validate_cohort({d.path() / "t.train.ndjson", d.path() / "t.train.json", d.path() / "n.test.ndjson"});
  EXPECT_TRUE(report.ok()) << report.to_json();
  EXPECT_EQ(report.records, 110u);
}

TEST(Cohort, Errors) {
  const Pool pool = playout_pool(5, 1);
  TempDir d("royalgame_cohort_err");
  CohortSpec spec;
  spec.seed.reset();
  try {
    build_cohort(pool, spec, d.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeedMissing);
  }
  spec.seed = 1;
  spec.size = 1000;
  try {
    build_cohort(pool, spec, d.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPool);
  }
  spec.size = 5;
  spec.test_size = 5;
  spec.source = SourceDataset::NoGoalWsm;
  EXPECT_THROW(build_cohort(pool, spec, d.path()), Error);
}

TEST(Cohort, UniqueSourceDropsRepeatedPairs) {
  Pool pool = playout_pool(10, 2);
  const std::size_t n = pool.pairs.size();
  const auto copy = pool.pairs;
  pool.pairs.insert(pool.pairs.end(), copy.begin(), copy.end());
  TempDir d("royalgame_cohort_unique");
  CohortSpec spec;
  spec.name = "u";
  spec.source = SourceDataset::UniqueWsm;
  spec.test_size = 10;
  spec.size = 50;
  const auto m = build_cohort(pool, spec, d.path());
  EXPECT_GE(m.excluded_duplicates, n);
  const auto report = validate_cohort({d.path() / "u.train.ndjson", d.path() / "u.test.ndjson"});
  EXPECT_DOUBLE_EQ(report.duplicate_rate, 0.0);
}

TEST(Cohort, LadderShrinksOversizedRungs) {
  const Pool pool = playout_pool(10, 4);
  TempDir d("royalgame_ladder");
  CohortSpec base;
  base.name = "l";
  base.test_size = 20;
  const auto ms = build_cohort_ladder(pool, base, {10, 100000}, d.path());
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].spec.name, "l-10");
  EXPECT_TRUE(ms[0].warnings.empty());
  EXPECT_EQ(ms[1].train_count + 20, pool.pairs.size() - ms[1].excluded_unrepresentable);
  EXPECT_EQ(ms[1].warnings.size(), 1u);
}

TEST(Lint, FlagsBrokenRecords) {
  TempDir d("royalgame_lint");
  const std::string board = render_square_list(GameState::initial());
  std::ofstream(d.path() / "bad.ndjson")
      << R"({"instruction":")" << make_instruction(board, true) << R"(","input":"","output":"e4"})" << "\n"
      << R"({"instruction":")" << make_instruction(board, true) << R"(","input":"","output":"e5"})" << "\n"
      << R"({"instruction":"","input":"","output":"e4"})" << "\n"
      << R"({"instruction":"hello","input":"","output":"e4"})" << "\n"
      << R"({"instruction":")" << make_instruction("e1:K, a1:K", true) << R"(","input":"","output":"e4"})" << "\n"
      << "not json\n";
  const auto r = validate_cohort({d.path() / "bad.ndjson", d.path() / "missing.ndjson"});
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.records, 6u);
  EXPECT_EQ(r.empty_instructions, 1u);
  std::multiset<std::string> codes;
  for (const auto& v : r.violations) codes.insert(v.code);
  EXPECT_EQ(codes.count("no-matching-legal-move"), 1u);
  EXPECT_EQ(codes.count("empty-instruction"), 1u);
  EXPECT_EQ(codes.count("malformed-record"), 2u);
  EXPECT_EQ(codes.count("unordered-pairs"), 1u);
  EXPECT_EQ(codes.count("io-error"), 1u);
}
