#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "royalgame/error.hpp"
#include "royalgame/harness.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/pipeline.hpp"

using namespace royalgame;
namespace fs = std::filesystem;

namespace {

ErrorCode schema_code(const std::string& config) {
  try {
    validate_config(config);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

class PipelineDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("royalgame_pipeline_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "pgn");
    fs::copy_file(ROYALGAME_TEST_DATA "/sample.pgn", dir_ / "pgn" / "sample.pgn");
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& body) {
    const fs::path p = dir_ / "config.json";
    std::ofstream(p) << body;
    return p;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kFullConfig = R"({
  "version": 1,
  "workdir": "work",
  "stages": ["ingest", "cohorts", "puzzles", "eval"],
  "ingest": {"inputs": ["pgn"]},
  "cohorts": {"sizes": [5, 8], "test_size": 5, "seed": 7},
  "puzzles": {"seed": 3, "count": 15, "max_pieces": 24},
  "eval": {"dataset": "work/puzzles.ndjson", "endpoint": "baseline:greedy"}
})";

}  // namespace

TEST(Config, SchemaErrors) {
  EXPECT_EQ(schema_code("nope"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code("[]"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":2,"stages":["ingest"],"ingest":{"inputs":[]}})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":[]})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["train"]})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles","puzzles"]})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["ingest"]})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles"],"puzzles":{"count":"ten"}})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles"],"puzzles":{"colour":"w"}})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles"],"extra":1})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles"],"puzzles":{"mode":"import"}})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["eval"],"eval":{"dataset":"d","endpoint":"e","mode":"twice"}})"),
            ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["cohorts"],"cohorts":{"sizes":[0]}})"), ErrorCode::SchemaError);
  EXPECT_EQ(schema_code(R"({"version":1,"stages":["puzzles"]})"), ErrorCode::Io);
  EXPECT_EQ(schema_code(kFullConfig), ErrorCode::Io);
}

TEST(EndpointSpec, Parsing) {
  EXPECT_TRUE(endpoint_from_spec("baseline:random:5"));
  EXPECT_TRUE(endpoint_from_spec("baseline:noisy:1:0.2"));
  EXPECT_TRUE(endpoint_from_spec("cmd:cat"));
  EXPECT_TRUE(endpoint_from_spec("http://127.0.0.1:9/x"));
  EXPECT_THROW(endpoint_from_spec("baseline:oracle"), Error);
  EXPECT_THROW(endpoint_from_spec("baseline:random:abc"), Error);
  EXPECT_THROW(endpoint_from_spec("baseline:frequency"), Error);
  EXPECT_THROW(endpoint_from_spec("baseline:frequency:/no/such/file"), Error);
  EXPECT_THROW(endpoint_from_spec("grpc://x"), Error);
}

TEST_F(PipelineDir, RunsStagesThenSkipsUnchangedWork) {
  const fs::path cfg = write_config(kFullConfig);
  const PipelineResult first = run_pipeline(cfg);
  ASSERT_EQ(first.stages.size(), 4u);
  for (const auto& s : first.stages) EXPECT_EQ(s.status, "ran") << s.stage << ": " << s.detail;
  EXPECT_EQ(first.exit_code(), 0);
  EXPECT_TRUE(fs::exists(dir_ / "work" / "pairs.ndjson"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "stats" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "cohorts" / "wsm-5.manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "cohorts" / "wsm-8.train.json"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "cohorts" / "lint.json"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "puzzles.stats.json"));
  EXPECT_TRUE(fs::exists(dir_ / "work" / "eval" / "report.json"));
  const std::string report = slurp(dir_ / "work" / "eval" / "report.json");

  const PipelineResult second = run_pipeline(cfg);
  for (const auto& s : second.stages) EXPECT_EQ(s.status, "skipped") << s.stage;

  // Changing an output forces that stage (only) to run again.
  std::ofstream(dir_ / "work" / "eval" / "report.json") << "{}";
  const PipelineResult third = run_pipeline(cfg);
  EXPECT_EQ(third.stages[2].status, "skipped");
  EXPECT_EQ(third.stages[3].status, "ran");
  EXPECT_EQ(slurp(dir_ / "work" / "eval" / "report.json"), report);

  std::istringstream journal(slurp(dir_ / "work" / "journal.ndjson"));
  std::size_t lines = 0;
  for (std::string l; std::getline(journal, l);) ++lines;
  EXPECT_EQ(lines, 12u);
}

TEST_F(PipelineDir, ConfigChangeInvalidatesStage) {
  const fs::path cfg = write_config(
      R"({"version":1,"workdir":"w","stages":["puzzles"],"puzzles":{"seed":1,"count":5}})");
  EXPECT_EQ(run_pipeline(cfg).stages[0].status, "ran");
  EXPECT_EQ(run_pipeline(cfg).stages[0].status, "skipped");
  write_config(R"({"version":1,"workdir":"w","stages":["puzzles"],"puzzles":{"seed":2,"count":5}})");
  EXPECT_EQ(run_pipeline(cfg).stages[0].status, "ran");
}

TEST_F(PipelineDir, MissingInputFailsNamedStage) {
  const fs::path cfg = write_config(
      R"({"version":1,"workdir":"w","stages":["ingest","puzzles"],"ingest":{"inputs":["nowhere.pgn"]}})");
  const PipelineResult r = run_pipeline(cfg);
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_EQ(r.stages[0].status, "failed");
  EXPECT_EQ(r.stages[0].detail.rfind("stage-failure: ingest: ", 0), 0u) << r.stages[0].detail;
  EXPECT_EQ(r.exit_code(), 1);
}

TEST_F(PipelineDir, ImportedPuzzlesAndSweep) {
  std::ofstream(dir_ / "p.fen") << "6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1\n" << kInitialFen << "\n";
  const fs::path cfg = write_config(R"({
    "version": 1, "workdir": "w", "stages": ["puzzles", "sweep"],
    "puzzles": {"mode": "import", "input": "p.fen"},
    "sweep": {"dataset": "w/puzzles.ndjson", "endpoint": "baseline:noisy:4:0.5", "temperatures": [1.0, 2.0],
              "max_retries": 3}
  })");
  const PipelineResult r = run_pipeline(cfg);
  ASSERT_EQ(r.stages.size(), 2u);
  EXPECT_EQ(r.stages[0].status, "ran") << r.stages[0].detail;
  EXPECT_EQ(r.stages[1].status, "ran") << r.stages[1].detail;
  const std::string csv = slurp(dir_ / "w" / "sweep" / "sweep.csv");
  EXPECT_NE(csv.find("\n1,1,0,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n2,1,0,"), std::string::npos) << csv;
}

TEST_F(PipelineDir, IngestDedupeIsIdempotent) {
  const auto once = ingest_pgn_files({dir_ / "pgn"}, PairFilter::WhiteOnly, true);
  write_pairs(once.pairs, dir_ / "a.ndjson");
  const auto twice = ingest_pgn_files({dir_ / "pgn", dir_ / "pgn" / "sample.pgn"}, PairFilter::WhiteOnly, true);
  EXPECT_EQ(twice.pairs.size(), once.pairs.size());
  EXPECT_EQ(twice.games.size(), 2 * once.games.size());
  EXPECT_THROW(ingest_pgn_files({dir_ / "absent"}, PairFilter::All, false), Error);
}

TEST_F(PipelineDir, CliRunsConfig) {
  const fs::path cfg = write_config(
      R"({"version":1,"workdir":"w","stages":["puzzles"],"puzzles":{"seed":1,"count":3}})");
  const std::string cmd = std::string(ROYALGAME_CLI) + " run " + cfg.string() + " > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "w" / "puzzles.ndjson"));
  write_config(R"({"version":1})");
  EXPECT_NE(std::system(cmd.c_str()), 0);
}
