#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vresbid/bid.hpp"
#include "vresbid/dam.hpp"
#include "vresbid/rtm.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

enum class Framework { kMyd, kBid, kStd, kOracle };

std::string_view to_string(Framework f);
// Accepts "myd", "bid", "std", "oracle" in any case.
Framework framework_from_string(std::string_view s);

struct CostReport {
  Framework framework = Framework::kMyd;
  double total = 0.0;     // S = f_DA + sum_w pi_w f_RT_w
  double dam_cost = 0.0;  // f_DA
  double expected_rt_cost = 0.0;
  std::vector<double> rt_costs;  // per scenario
  double cost_std = 0.0;         // weighted std of f_DA + f_RT_w
  std::optional<BidVector> bids;              // absent for StD
  std::optional<double> relaxed_objective;    // BiD only
  DamSolution dam;  // StD carries the primal schedule only
  RtmResults rtm;
};

// Fills totals and spread from dam_cost, rt_costs and the scenario weights.
void finalize(CostReport& report, const ScenarioSet& scenarios);

// Bids at the expected VRES output.
CostReport run_myd(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config = {});

CostReport run_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config = {});

// Joint day-ahead and re-dispatch LP with installed VRES capacity as the
// day-ahead bound.
CostReport run_std(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config = {});

struct OracleOptions {
  double step = 1.0;  // MW
  // Per (vres, period) grid top; empty means installed capacity.
  Grid upper;
  std::size_t max_points = 1000000;
};

// Exhaustive sequential evaluation over {0, step, 2 step, ..., upper}.
// The first minimizer in lexicographic grid order wins ties. Throws
// ConfigError when the grid exceeds max_points.
CostReport run_oracle(const PowerSystem& system, const ScenarioSet& scenarios,
                      const OracleOptions& options, const RunConfig& config = {});

CostReport run_framework(Framework f, const PowerSystem& system,
                         const ScenarioSet& scenarios, const RunConfig& config = {},
                         const OracleOptions& oracle = {});

struct OutOfSample {
  Framework framework = Framework::kMyd;
  std::vector<double> costs;  // per test set
  double mean = 0.0;
  double stddev = 0.0;  // population std over test sets
};

// Freezes the day-ahead schedule of `trained` and re-prices only the
// re-dispatch under each test set.
OutOfSample out_of_sample(const PowerSystem& system, const CostReport& trained,
                          const std::vector<ScenarioSet>& tests,
                          const RunConfig& config = {});

OutOfSample out_of_sample(const PowerSystem& system, const ScenarioSet& train,
                          Framework framework, const std::vector<ScenarioSet>& tests,
                          const RunConfig& config = {},
                          const OracleOptions& oracle = {});

struct WindowRecord {
  std::size_t first_period = 0;
  std::vector<double> initial_commitment, initial_output;    // per unit
  std::vector<double> terminal_commitment, terminal_output;  // per unit
  CostReport report;
};

struct RollingResult {
  CostReport stitched;
  std::vector<WindowRecord> windows;
};

// Consecutive windows of `window` periods; each window starts from the
// previous window's last day-ahead commitment and output.
RollingResult rolling_horizon(const PowerSystem& system, const ScenarioSet& scenarios,
                              std::size_t window, Framework framework,
                              const RunConfig& config = {},
                              const OracleOptions& oracle = {});

}  // namespace vresbid
