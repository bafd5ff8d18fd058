#include "vresbid/study.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "vresbid/errors.hpp"

namespace vresbid {
namespace {

using nlohmann::json;
using testing::fixture_path;
using testing::two_bus;
using testing::wind_scenarios;

json base_spec() {
  return {{"system", "system.json"},
          {"scenarios", "scenarios.csv"},
          {"frameworks", {"myd", "std"}},
          {"config", {{"gamma", 2.0}, {"seed", 7}}}};
}

StudySpec spec_from(const json& j) {
  return study_from_json(j, fixture_path("two_bus"));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("vresbid_study_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(p);
  return p;
}

TEST(StudySpecParse, DefaultsAndResolution) {
  const StudySpec s = spec_from(base_spec());
  EXPECT_EQ(s.frameworks.size(), 2u);
  EXPECT_EQ(s.gamma, std::vector<double>{2.0});
  EXPECT_EQ(s.config.seed, 7u);
  EXPECT_EQ(s.system, fixture_path("two_bus") / "system.json");
  EXPECT_EQ(s.flexibility, std::vector<Flexibility>{Flexibility::kMedium});
}

TEST(StudySpecParse, Rejections) {
  json j = base_spec();
  j["frameworks"] = json::array();
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j["colour"] = "blue";
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j["sweeps"] = {{"gamma", json::array()}};
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j["sweeps"] = {{"flexibility", {"superFlx"}}};
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j["frameworks"] = {"mean"};
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j.erase("scenarios");
  EXPECT_THROW(spec_from(j), ConfigError);
  j = base_spec();
  j["oracle_step"] = "big";
  EXPECT_THROW(spec_from(j), ConfigError);
}

TEST(StudySpecParse, FixtureFileLoads) {
  const StudySpec s = load_study(fixture_path("two_bus/study.json"));
  EXPECT_EQ(s.frameworks.size(), 4u);
  EXPECT_EQ(s.oracle.step, 1.0);
}

TEST(Scaling, LinesAndFlexibility) {
  const PowerSystem s = two_bus();
  EXPECT_EQ(scale_lines(s, 2.0).lines()[0].capacity, 200.0);
  EXPECT_EQ(apply_flexibility(s, Flexibility::kLow).units()[0].startup_class,
            StartupClass::kSlow);
  EXPECT_EQ(apply_flexibility(s, Flexibility::kHigh).units()[0].startup_class,
            StartupClass::kFast);
  EXPECT_THROW(scale_lines(s, 0.0), ValidationError);
}

TEST(Scaling, PenetrationMatchesDemandShare) {
  const PowerSystem s = two_bus();
  const ScenarioSet sc = wind_scenarios(s, {30, 0}, 50);
  const double f = penetration_factor(sc, 40.0);
  EXPECT_NEAR(f, 0.4 * 50.0 / 15.0, 1e-12);
  const PowerSystem scaled = scale_vres_capacity(s, f);
  const ScenarioSet out = scale_vres_output(scaled, sc, f);
  EXPECT_NEAR(out.expected_vres()[0][0], 20.0, 1e-9);
  EXPECT_NEAR(scaled.vres()[0].capacity, 30.0 * f, 1e-12);
  EXPECT_THROW(penetration_factor(wind_scenarios(s, {0}, 50), 40.0), ValidationError);
}

TEST(Scaling, FirstScenariosRenormalize) {
  const PowerSystem s = two_bus();
  const ScenarioSet sc = wind_scenarios(s, {30, 0, 10, 20}, 50);
  const ScenarioSet two = first_scenarios(s, sc, 2);
  EXPECT_EQ(two.num_scenarios(), 2u);
  EXPECT_NEAR(two.weight(0), 0.5, 1e-12);
  EXPECT_THROW(first_scenarios(s, sc, 5), ValidationError);
}

TEST(RunStudy, MydAndStdPerPoint) {
  json j = base_spec();
  j["sweeps"] = {{"line_scale", {1.0, 2.0}}, {"flexibility", {"mFlx", "hFlx"}}};
  const StudyResult r = run_study(spec_from(j));
  EXPECT_TRUE(r.ok());
  ASSERT_EQ(r.points.size(), 4u);
  ASSERT_EQ(r.records.size(), 8u);
  for (std::size_t i = 0; i < r.records.size(); i += 2) {
    EXPECT_EQ(r.records[i].report.framework, Framework::kMyd);
    EXPECT_EQ(r.records[i + 1].report.framework, Framework::kStd);
    EXPECT_EQ(r.records[i].point, r.records[i + 1].point);
    EXPECT_LE(r.records[i + 1].report.total, r.records[i].report.total * (1 + 1e-6));
  }
}

TEST(RunStudy, GammaSweepGivesOneBidRowPerValue) {
  json j = base_spec();
  j["frameworks"] = {"myd", "bid"};
  j["sweeps"] = {{"gamma", {0.2, 0.6, 1.0, 1.4}}};
  const StudyResult r = run_study(spec_from(j));
  EXPECT_TRUE(r.ok());
  std::size_t bid = 0;
  for (const auto& rec : r.records) {
    if (rec.report.framework == Framework::kBid) {
      ++bid;
      EXPECT_TRUE(rec.parameters.contains("gamma"));
    }
  }
  EXPECT_EQ(bid, 4u);
  EXPECT_EQ(r.records.size(), 5u);
}

TEST(RunStudy, FailedPointIsRecordedAndSweepContinues) {
  json j = base_spec();
  j["sweeps"] = {{"scenario_counts", {5, 1}}};
  const StudyResult r = run_study(spec_from(j));
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.failures[0].error, "validation");
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.manifest["status"], "failed");
}

TEST(RunStudy, MissingSystemFileThrows) {
  json j = base_spec();
  j["system"] = "nope.json";
  EXPECT_THROW(run_study(spec_from(j)), Error);
}

TEST(RunStudy, SamplerOutOfSampleAndRolling) {
  json j = base_spec();
  j["sampler"] = {{"count", 4}, {"vres_relative_std", 0.5}};
  j["out_of_sample"] = {{"tests", 3}};
  const StudyResult r = run_study(spec_from(j));
  ASSERT_TRUE(r.ok());
  for (const auto& rec : r.records) {
    ASSERT_TRUE(rec.out_of_sample.has_value());
    EXPECT_EQ(rec.out_of_sample->costs.size(), 3u);
    EXPECT_EQ(rec.report.rt_costs.size(), 4u);
  }
}

TEST(RunStudy, ByteIdenticalOutputs) {
  json j = base_spec();
  j["frameworks"] = {"myd", "bid", "std", "oracle"};
  j["sweeps"] = {{"gamma", {1.0, 2.0}}};
  j["out_of_sample"] = {{"tests", 2}};
  const auto a = temp_dir("a"), b = temp_dir("b");
  j["output_dir"] = a.string();
  run_study_and_write(spec_from(j));
  j["output_dir"] = b.string();
  j["parallel"] = true;
  run_study_and_write(spec_from(j));
  for (const char* f : {"costs.csv", "prices_dam.csv", "prices_rt.csv", "revenues.csv",
                        "uc_quality.csv", "out_of_sample.csv", "price_stats.csv",
                        "run_summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(a / "manifest.json"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

}  // namespace
}  // namespace vresbid
