#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vresbid/bench.hpp"
#include "vresbid/report.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

// lFlx: every unit slow; mFlx: as given; hFlx: every unit fast.
enum class Flexibility { kLow, kMedium, kHigh };

std::string_view to_string(Flexibility f);
Flexibility flexibility_from_string(std::string_view s);

struct SamplerSpec {
  std::optional<std::filesystem::path> base_profile;  // defaults to the scenario file mean
  std::size_t count = 20;
  SamplerOptions options;
};

struct OutOfSampleSpec {
  std::size_t tests = 0;      // 0 disables the protocol
  std::size_t scenarios = 0;  // per test set; 0 means the training count
  SamplerOptions options;
};

struct StudySpec {
  std::filesystem::path system;
  std::optional<std::filesystem::path> scenarios;
  std::optional<SamplerSpec> sampler;
  std::vector<Framework> frameworks;
  RunConfig config;
  // Sweeps; each list holds at least one value.
  std::vector<double> gamma;
  std::vector<double> xi;
  std::vector<std::size_t> scenario_counts;  // 0 means every scenario
  std::vector<double> vres_penetration;      // percent of demand energy; 0 keeps data
  std::vector<double> line_scale;
  std::vector<Flexibility> flexibility;
  OracleOptions oracle;
  OutOfSampleSpec out_of_sample;
  std::filesystem::path output_dir;
  bool parallel = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Relative paths resolve against `base_dir`. Throws ConfigError.
StudySpec study_from_json(const nlohmann::json& j,
                          const std::filesystem::path& base_dir = {});
StudySpec load_study(const std::filesystem::path& path);
nlohmann::json study_to_json(const StudySpec& spec);

// Scales every line capacity.
PowerSystem scale_lines(const PowerSystem& system, double factor);
PowerSystem apply_flexibility(const PowerSystem& system, Flexibility f);

// Scales installed VRES capacity and every realization so expected VRES
// energy equals `percent` of expected demand energy over the horizon.
// Returns the factor applied.
double penetration_factor(const ScenarioSet& scenarios, double percent);
PowerSystem scale_vres_capacity(const PowerSystem& system, double factor);
ScenarioSet scale_vres_output(const PowerSystem& scaled, const ScenarioSet& scenarios,
                              double factor);

// First `count` scenarios with weights renormalized.
ScenarioSet first_scenarios(const PowerSystem& system, const ScenarioSet& scenarios,
                            std::size_t count);

struct PointSummary {
  std::string label;
  nlohmann::json parameters;
  std::size_t runs = 0;
  std::size_t failures = 0;
};

struct StudyResult {
  std::vector<RunRecord> records;
  std::vector<FailureRecord> failures;
  std::vector<PointSummary> points;
  nlohmann::json manifest;

  bool ok() const { return failures.empty(); }
};

// Runs every sweep point and framework. Errors inside a point are recorded
// and the sweep continues. Input files that fail to load throw.
StudyResult run_study(const StudySpec& spec);

// run_study plus the report tables and manifest.json in spec.output_dir.
StudyResult run_study_and_write(const StudySpec& spec);

}  // namespace vresbid
