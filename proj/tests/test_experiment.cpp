#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "arcs/experiment.hpp"

using namespace arcs;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.name = "small";
  cfg.trials = 3;
  cfg.seed = 5;
  CaseConfig pairs;
  pairs.label = "pairs";
  pairs.family = Family::Pairs;
  pairs.l = 400;
  pairs.k = 100;
  pairs.s = 20;
  pairs.stages = {"o", "or", "r"};
  CaseConfig clouds;
  clouds.label = "clouds";
  clouds.family = Family::Clouds;
  clouds.m = 200;
  clouds.n = 150;
  clouds.k = 60;
  clouds.s = 20;
  clouds.stages = {"n", "no", "nor"};
  CaseConfig exact;
  exact.label = "exact";
  exact.family = Family::Clouds;
  exact.m = 500;
  exact.n = 400;
  exact.k = 2;
  exact.sigma = 0.0;
  exact.stages = {"arcs"};
  cfg.cases = {pairs, clouds, exact};
  return cfg;
}

}  // namespace

TEST(Experiment, RecordsPerCaseTrialStage) {
  const auto rep = run_experiment(small_config());
  EXPECT_EQ(rep.records.size(), 3u * (3 + 3 + 1));
  EXPECT_EQ(rep.summaries.size(), 7u);
  EXPECT_EQ(rep.summary("exact", "arcs").success_rate, 1.0);
  EXPECT_TRUE(std::isnan(rep.summary("clouds", "n").mean_error_deg));
  EXPECT_GT(rep.summary("clouds", "n").mean_inlier_purity, 0.0);
  EXPECT_THROW(rep.summary("clouds", "o"), std::out_of_range);
}

TEST(Experiment, IndependentOfThreadCount) {
  set_max_threads(1);
  const auto a = run_experiment(small_config());
  set_max_threads(3);
  const auto b = run_experiment(small_config());
  set_max_threads(0);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].consensus_size, b.records[i].consensus_size);
    if (!std::isnan(a.records[i].error_deg)) EXPECT_EQ(a.records[i].error_deg, b.records[i].error_deg);
  }
}

TEST(Experiment, PairedSeedsAcrossCases) {
  const auto rep = run_experiment(small_config());
  for (const auto& r : rep.records) EXPECT_EQ(r.seed, derive_seed(5, static_cast<std::uint64_t>(r.trial)));
}

TEST(Experiment, Validation) {
  auto cfg = small_config();
  cfg.cases[0].stages = {"n"};
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.cases[1].label = "pairs";
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.cases[0].sigma = 0.0;
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.trials = 0;
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(Presets, AllBuildAndValidate) {
  for (const auto& p : preset_catalog()) {
    for (const bool full : {false, true}) {
      const auto cfg = make_preset(p.name, full);
      EXPECT_EQ(cfg.name, p.name);
      EXPECT_NO_THROW(detail::validate(cfg)) << p.name;
    }
  }
  EXPECT_THROW(make_preset("table9"), std::invalid_argument);
}

TEST(Presets, FixedRotationAngles) {
  const auto cfg = make_preset("fig5_sensitivity");
  const auto& c = cfg.cases.back();
  ASSERT_TRUE(c.rotation.theta && c.rotation.phi && c.rotation.omega);
  const auto r = detail::draw_rotation(c.rotation, 3);
  ASSERT_TRUE(r);
  const auto aa = AxisAngle::axis_from_angles(*c.rotation.theta, *c.rotation.phi);
  EXPECT_LT((*r * aa - aa).norm(), 1e-12);
}

TEST(Report, JsonAndCsv) {
  auto cfg = small_config();
  cfg.trials = 1;
  const auto rep = run_experiment(cfg);
  const auto j = to_json(rep);
  EXPECT_EQ(j["config"]["seed"], 5);
  EXPECT_EQ(j["rng"], kRngAlgorithm);
  EXPECT_EQ(j["records"].size(), rep.records.size());
  EXPECT_TRUE(j["aggregates"][3]["mean_error_deg"].is_null());

  const auto dir = std::filesystem::temp_directory_path() / "arcs_report_test";
  std::filesystem::create_directories(dir);
  write_trials_csv((dir / "t.csv").string(), rep);
  write_summary_csv((dir / "s.csv").string(), rep);
  std::ifstream t(dir / "t.csv"), s(dir / "s.csv");
  std::string header;
  std::getline(t, header);
  EXPECT_EQ(header, "case,trial,stage,error_deg,runtime_ms,consensus_size,inlier_purity");
  std::size_t rows = 0;
  for (std::string line; std::getline(t, line);) ++rows;
  EXPECT_EQ(rows, rep.records.size());
  std::getline(s, header);
  EXPECT_EQ(header.substr(0, 17), "case,stage,trials");
  std::filesystem::remove_all(dir);
}
