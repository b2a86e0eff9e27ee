#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(BRILLIANT_EXE) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("brilliant_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "three.pgn") << "[Event \"t\"]\n\n1. e4! e5 2. Nf3!! Nc6 3. Bb5 {Ruy Lopez} *\n";
    std::ofstream(dir_ / "cfg.json")
        << R"({"search": {"budgets": [2, 4, 8, 16, 32]}, "train": {"kind": "logreg", "max_epochs": 3}})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string base() const {
    return "--config " + (dir_ / "cfg.json").string() + " --work-dir " + (dir_ / "work").string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FeaturesOnThreeRowDataset) {
  ASSERT_EQ(run(base() + " ingest --pgn " + (dir_ / "three.pgn").string()).code, 0);
  const Result r = run(base() + " features --workers 2");
  ASSERT_EQ(r.code, 0) << r.output;
  const fs::path f = dir_ / "work" / "features" / "train.f32";
  EXPECT_EQ(fs::file_size(f), 3u * 3980u * sizeof(float));
  const auto meta = nlohmann::json::parse(slurp(fs::path(f.string() + ".json")));
  EXPECT_EQ(meta["n_cols"], 3980);
  EXPECT_EQ(meta["n_rows"], 3);
}

TEST_F(Cli, PredictIllegalMoveExitsTwo) {
  const Result r = run(base() + " predict --fen 'rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1' --move e2e5");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("illegal move"), std::string::npos) << r.output;
}

TEST_F(Cli, UsageErrorExitsOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run(base() + " features --split validation").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, MissingPrerequisiteNamesStage) {
  const Result r = run(base() + " train");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("features/train.f32"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("brilliant features"), std::string::npos) << r.output;
}

TEST_F(Cli, HelpListsEveryTrainingFlag) {
  const Result r = run("train --help");
  for (const char* flag : {"--kind", "--hidden", "--dropout", "--selector", "--lr", "--weight-decay", "--batch-size",
                           "--max-epochs", "--patience", "--seed", "--class-weighting"})
    EXPECT_NE(r.output.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, ConfigShowPrintsDefaults) {
  const Result r = run("config show");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_EQ(j["search"]["budgets"], nlohmann::json({10, 100, 1000, 10000, 100000}));
  EXPECT_TRUE(j["train"].contains("lr"));
  EXPECT_TRUE(j["train"].contains("dropout"));
}

TEST_F(Cli, RerunIsByteIdentical) {
  const std::string pgn = std::string(FIXTURE_DIR) + "/annotated.pgn";
  const std::vector<std::string> stages{"ingest --pgn " + pgn, "features --workers 3", "train", "evaluate --split train",
                                        "perturb", "plotdata"};
  const std::vector<fs::path> artifacts{"dataset.jsonl",        "manifest.json",           "features/train.f32",
                                        "features/train.f32.json", "checkpoints/model.json", "reports/evaluate-train.json",
                                        "reports/perturbation-all.json", "reports/violin-all.csv", "runs/train.json"};
  std::map<fs::path, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& s : stages) {
      const Result r = run(base() + " " + s);
      ASSERT_EQ(r.code, 0) << s << "\n" << r.output;
    }
    for (const auto& a : artifacts) {
      const std::string bytes = slurp(dir_ / "work" / a);
      ASSERT_FALSE(bytes.empty()) << a;
      if (pass == 0) first[a] = bytes;
      else EXPECT_EQ(first[a], bytes) << a;
    }
  }
}
