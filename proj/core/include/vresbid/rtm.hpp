#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vresbid/dam.hpp"
#include "vresbid/lp.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

// Re-dispatch of one scenario against a fixed day-ahead schedule.
struct RtmSolution {
  std::string scenario_id;
  std::size_t scenario = 0;
  Grid r_up, r_down, u, c;  // [unit][period]
  Grid curtail;             // [vres][period]
  Grid shed, delta, price;  // [bus][period]
  double cost = 0.0;
};

struct RtmResults {
  std::vector<RtmSolution> scenarios;  // scenario order of the ScenarioSet
  double expected_cost = 0.0;
};

LpModel build_rtm(const PowerSystem& system, const ScenarioSet& scenarios,
                  const DamSolution& da, std::string_view scenario_id,
                  const RunConfig& config = {});

// Throws ValidationError for an unknown scenario id and SolverError if the
// re-dispatch has no feasible point (committed minimum output above demand).
RtmSolution solve_rtm(const PowerSystem& system, const ScenarioSet& scenarios,
                      const DamSolution& da, std::string_view scenario_id,
                      const RunConfig& config = {});

// All scenarios, solved concurrently and aggregated in scenario order.
RtmResults solve_rtm_all(const PowerSystem& system, const ScenarioSet& scenarios,
                         const DamSolution& da, const RunConfig& config = {});

double expected_rt_cost(const PowerSystem& system, const ScenarioSet& scenarios,
                        const DamSolution& da, const RunConfig& config = {});

// Largest |balance residual| in MW for one scenario.
double rtm_balance_residual(const PowerSystem& system, const ScenarioSet& scenarios,
                            const DamSolution& da, const RtmSolution& rt);

}  // namespace vresbid
