#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cpscausal_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI inside the temp dir; returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" + CPSCAUSAL_CLI + "' " + args +
                            " >stdout.txt 2>stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string data(const std::string& rel) { return std::string(CPSCAUSAL_DATA_DIR) + "/" + rel; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, PipelineAndReplay) {
  ASSERT_EQ(run("sample --fixture stage1 --n 2000 --seed 3 --out log.csv"), 0);
  ASSERT_EQ(run("discretize --input log.csv --spec '" + data("specs/stage1.spec") + "' --out ds.json"), 0);
  ASSERT_EQ(run("learn --dataset ds.json --algo hc --out g.json"), 0);
  ASSERT_EQ(run("fit --dataset ds.json --graph g.json --estimator bayes --out net.json"), 0);
  ASSERT_EQ(run("infer --net net.json --target MV101 --evidence FIT101=Low"), 0);
  EXPECT_NE(slurp("stdout.txt").find("Close"), std::string::npos);
  ASSERT_EQ(run("impact --net net.json --attacks '" + data("attacks.json") + "' --out impact.json"), 0);
  EXPECT_NE(slurp("impact.json").find("\"reports\""), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "impact.json.manifest.json"));
  EXPECT_EQ(run("replay impact.json.manifest.json"), 0);
  EXPECT_EQ(run("replay ds.json.manifest.json"), 0);

  // replay regenerates a clobbered output
  { std::ofstream(dir_ / "g.json", std::ios::app) << " "; }
  EXPECT_EQ(run("replay g.json.manifest.json"), 0);
  // but refuses once an input has changed
  { std::ofstream(dir_ / "ds.json", std::ios::app) << " "; }
  EXPECT_EQ(run("replay g.json.manifest.json"), 4);
}

TEST_F(CliTest, DomainGraphImpact) {
  ASSERT_EQ(run("impact --graph '" + data("domain/plant.txt") + "' --attacks '" + data("attacks.json") +
                "' --out impact.json"),
            0);
  EXPECT_NE(slurp("impact.json").find("FIT101"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("learn --dataset missing.json --out g.json"), 2);
  ASSERT_EQ(run("sample --fixture stage1 --n 100 --seed 1 --out log.csv"), 0);
  ASSERT_EQ(run("discretize --input log.csv --spec '" + data("specs/stage1.spec") + "' --out ds.json"), 0);
  ASSERT_EQ(run("learn --dataset ds.json --algo pc --dag --out g.json"), 0);
  EXPECT_EQ(run("learn --dataset ds.json --algo pc --out cpdag.json"), 0);
  EXPECT_EQ(run("fit --dataset ds.json --graph cpdag.json --out n0.json"), 4);
  ASSERT_EQ(run("fit --dataset ds.json --graph g.json --out net.json"), 0);
  EXPECT_EQ(run("impact --net net.json --attacks '" + data("attacks.json") + "' --theta 1.5"), 2);
  EXPECT_NE(slurp("stderr.txt").find("\"error\""), std::string::npos);
  EXPECT_EQ(run("learn --dataset ds.json --algo hc --score chi2 --out g2.json"), 2);
  EXPECT_EQ(run("fit --dataset ds.json --graph g.json --estimator bayes --ess 0 --out n2.json"), 2);
  EXPECT_EQ(run("infer --net net.json --target NOPE"), 4);

  { std::ofstream(dir_ / "bad.csv") << "LIT101,MV101\n1,abc\n"; }
  EXPECT_EQ(run("discretize --input bad.csv --spec '" + data("specs/stage1.spec") + "' --out x.json"), 3);
  EXPECT_FALSE(fs::exists(dir_ / "x.json"));
}

TEST_F(CliTest, ExportDot) {
  ASSERT_EQ(run("export --graph '" + data("domain/stage1.txt") + "' --format dot --out g.dot"), 0);
  const auto dot = slurp("g.dot");
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("LIT101"), std::string::npos);
}
