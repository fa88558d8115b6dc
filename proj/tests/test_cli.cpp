#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("arcs_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(ARCS_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string p(const char* name) const { return (dir_ / name).string(); }

  std::string slurp(const char* name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json json(const char* name) const { return nlohmann::json::parse(slurp(name)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateThenPipelineOnClouds) {
  ASSERT_EQ(run("gen srcs --m 1000 --n 800 --k 200 --sigma 0.01 --seed 3 --out " + dir_.string()), 0);
  ASSERT_TRUE(fs::exists(p("Q.csv")));
  ASSERT_EQ(json("truth.json")["inliers"].size(), 200u);
  ASSERT_EQ(run("pipeline --q " + p("Q.csv") + " --p " + p("P.csv") + " --stage n,o,r --sigma 0.01 --truth " +
                p("truth.json") + " --seed 3 --out " + p("r.json")),
            0);
  const auto j = json("r.json");
  EXPECT_LT(j["error_deg"].get<double>(), 1.0);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["quaternion"].size(), 4u);
  EXPECT_TRUE(j["timings_ms"].contains("n"));
  EXPECT_TRUE(j["timings_ms"].contains("r"));
}

TEST_F(Cli, NoiselessStage) {
  ASSERT_EQ(run("gen srcs --m 2000 --n 1600 --k 2 --seed 1 --out " + dir_.string()), 0);
  ASSERT_EQ(run("pipeline --q " + p("Q.csv") + " --p " + p("P.csv") + " --stage arcs --truth " + p("truth.json") +
                " --out " + p("r.json")),
            0);
  EXPECT_LT(json("r.json")["error_deg"].get<double>(), 1e-6);
}

TEST_F(Cli, PairsPruneAndRefine) {
  ASSERT_EQ(run("gen rrs --l 2000 --k 200 --sigma 0.01 --norm-constrained --seed 2 --out " + dir_.string()), 0);
  ASSERT_EQ(run("prune --pairs " + p("pairs.csv") + " --sigma 0.01 --s 45 --truth " + p("truth.json") + " --out " +
                p("o.json")),
            0);
  const auto o = json("o.json");
  EXPECT_LT(o["error_deg"].get<double>(), 5.0);
  EXPECT_EQ(o["s"], 45);
  ASSERT_EQ(run("pipeline --pairs " + p("pairs.csv") + " --stage o,r --sigma 0.01 --truth " + p("truth.json") +
                " --out " + p("or.json")),
            0);
  EXPECT_LT(json("or.json")["error_deg"].get<double>(), 1.0);
  ASSERT_EQ(run("refine --pairs " + p("pairs.csv") + " --w0 1,0,0,0 --iters 5 --out " + p("r.json")), 0);
  EXPECT_LE(json("r.json")["refine"]["iterations"].get<int>(), 5);
}

TEST_F(Cli, MatchWritesCorrespondences) {
  ASSERT_EQ(run("gen srcs --m 100 --n 80 --k 5 --seed 4 --out " + dir_.string()), 0);
  ASSERT_EQ(run("match --q " + p("Q.csv") + " --p " + p("P.csv") + " --noiseless --out " + p("m.csv") +
                " --pairs-out " + p("pairs.csv")),
            0);
  const auto text = slurp("m.csv");
  EXPECT_EQ(text.rfind("i,j\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST_F(Cli, BenchWritesReports) {
  ASSERT_EQ(run("bench --list"), 0);
  EXPECT_NE(slurp("stdout.txt").find("fig2_pipeline"), std::string::npos);
  ASSERT_EQ(run("bench --preset table3 --trials 2 --seed 9 --out-dir " + dir_.string()), 0);
  EXPECT_TRUE(fs::exists(p("table3.csv")));
  EXPECT_TRUE(fs::exists(p("table3_summary.csv")));
  EXPECT_EQ(json("table3.json")["config"]["seed"], 9);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 64);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("pipeline --pairs x.csv --stage q --sigma 0.1"), 64);
  EXPECT_EQ(run("bench --preset nope"), 64);
  EXPECT_EQ(run("prune --pairs " + p("missing.csv") + " --sigma 0.01"), 74);
  std::ofstream(p("bad.csv")) << "1,2,3,4,5,6\n1,2\n";
  EXPECT_EQ(run("prune --pairs " + p("bad.csv") + " --sigma 0.01"), 74);
  EXPECT_NE(slurp("stderr.txt").find(":2:"), std::string::npos);
  std::ofstream(p("bin.ply")) << "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
  EXPECT_EQ(run("match --q " + p("bin.ply") + " --p " + p("bin.ply") + " --sigma 0.01"), 74);
  std::ofstream(p("one.csv")) << "1,0,0\n";
  EXPECT_EQ(run("pipeline --q " + p("one.csv") + " --p " + p("one.csv") + " --stage arcs"), 2);
  EXPECT_EQ(run("refine --pairs " + p("bad.csv") + " --w0 0,0,0,0"), 74);
  std::ofstream(p("ok.csv")) << "1,0,0,1,0,0\n";
  EXPECT_EQ(run("refine --pairs " + p("ok.csv") + " --w0 0,0,0,0"), 64);
}

TEST_F(Cli, GenerationIsDeterministic) {
  ASSERT_EQ(run("gen rrs --l 500 --k 50 --sigma 0.01 --norm-constrained --seed 7 --out " + p("a")), 0);
  ASSERT_EQ(run("gen rrs --l 500 --k 50 --sigma 0.01 --norm-constrained --seed 7 --out " + p("b")), 0);
  EXPECT_EQ(slurp("a/pairs.csv"), slurp("b/pairs.csv"));
  EXPECT_EQ(slurp("a/truth.json"), slurp("b/truth.json"));
}

TEST_F(Cli, UnwritableOutputNamesPath) {
  std::ofstream(p("file")) << "x";
  EXPECT_EQ(run("gen rrs --l 10 --k 2 --out " + p("file") + "/sub"), 74);
  EXPECT_NE(slurp("stderr.txt").find("file/sub"), std::string::npos);
}
