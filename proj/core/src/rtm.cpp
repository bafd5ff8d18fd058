#include "vresbid/rtm.hpp"

#include <cmath>

#include "blocks.hpp"
#include "internal.hpp"
#include "parallel.hpp"
#include "vresbid/errors.hpp"

namespace vresbid {

namespace detail {

SolveOptions solve_options(const RunConfig& config) {
  SolveOptions o;
  o.tolerance = config.solver_tolerance;
  return o;
}

RtmSolution extract_rtm(const RtmBlock& b, const LpSolution& lp, double weight,
                        std::size_t scenario, const std::string& id) {
  RtmSolution s;
  s.scenario = scenario;
  s.scenario_id = id;
  const auto& x = lp.primal;
  s.r_up = values(b.r_up, x);
  s.r_down = values(b.r_down, x);
  s.u = values(b.u, x);
  s.c = values(b.c, x);
  s.curtail = values(b.curtail, x);
  s.shed = values(b.shed, x);
  s.delta = values(b.delta, x);
  s.price = duals(b.balance, lp.dual);
  for (auto& row : s.price) {
    for (double& v : row) v /= weight;
  }
  s.cost = b.cost(x);
  return s;
}

}  // namespace detail

namespace {

std::size_t scenario_index(const ScenarioSet& scenarios, std::string_view id) {
  auto w = scenarios.find_scenario(id);
  if (!w) throw ValidationError("unknown scenario id '" + std::string(id) + "'");
  return *w;
}

struct BuiltRtm {
  LpModel model;
  detail::RtmBlock block;
};

BuiltRtm build(const PowerSystem& system, const ScenarioSet& scenarios,
               const DamSolution& da, std::size_t w, const RunConfig& config) {
  if (da.periods != scenarios.periods() || da.p.size() != system.num_units()) {
    throw ValidationError("day-ahead schedule does not match the scenario set");
  }
  BuiltRtm out;
  const auto schedule = detail::schedule_from_values(da.p, da.u, da.c);
  out.block = detail::add_rtm_block(out.model, system, scenarios.periods(),
                                    scenarios.scenario(w).vres_output,
                                    scenarios.bus_demand(system, w), schedule,
                                    config.voll, 1.0, "");
  return out;
}

RtmSolution solve_index(const PowerSystem& system, const ScenarioSet& scenarios,
                        const DamSolution& da, std::size_t w,
                        const RunConfig& config) {
  BuiltRtm built = build(system, scenarios, da, w, config);
  const LpSolution lp = solve(built.model, detail::solve_options(config));
  const std::string& id = scenarios.scenario(w).id;
  if (!lp.optimal()) {
    throw SolverError("real-time re-dispatch for scenario '" + id + "' is " +
                      std::string(to_string(lp.status)) +
                      "; committed minimum output may exceed realized demand");
  }
  RtmSolution s = detail::extract_rtm(built.block, lp, 1.0, w, id);
  s.cost = lp.objective;
  return s;
}

}  // namespace

LpModel build_rtm(const PowerSystem& system, const ScenarioSet& scenarios,
                  const DamSolution& da, std::string_view scenario_id,
                  const RunConfig& config) {
  return build(system, scenarios, da, scenario_index(scenarios, scenario_id), config)
      .model;
}

RtmSolution solve_rtm(const PowerSystem& system, const ScenarioSet& scenarios,
                      const DamSolution& da, std::string_view scenario_id,
                      const RunConfig& config) {
  return solve_index(system, scenarios, da, scenario_index(scenarios, scenario_id),
                     config);
}

RtmResults solve_rtm_all(const PowerSystem& system, const ScenarioSet& scenarios,
                         const DamSolution& da, const RunConfig& config) {
  RtmResults out;
  out.scenarios.resize(scenarios.num_scenarios());
  detail::parallel_for(scenarios.num_scenarios(), config.threads, [&](std::size_t w) {
    out.scenarios[w] = solve_index(system, scenarios, da, w, config);
  });
  for (std::size_t w = 0; w < out.scenarios.size(); ++w) {
    out.expected_cost += scenarios.weight(w) * out.scenarios[w].cost;
  }
  return out;
}

double expected_rt_cost(const PowerSystem& system, const ScenarioSet& scenarios,
                        const DamSolution& da, const RunConfig& config) {
  return solve_rtm_all(system, scenarios, da, config).expected_cost;
}

double rtm_balance_residual(const PowerSystem& system, const ScenarioSet& scenarios,
                            const DamSolution& da, const RtmSolution& rt) {
  const Grid load = scenarios.bus_demand(system, rt.scenario);
  const auto& wind = scenarios.scenario(rt.scenario).vres_output;
  double worst = 0.0;
  for (std::size_t t = 0; t < da.periods.size(); ++t) {
    std::vector<double> net(system.num_buses(), 0.0);
    for (std::size_t i = 0; i < system.num_units(); ++i) {
      net[system.unit_bus(i)] += da.p[i][t] + rt.r_up[i][t] - rt.r_down[i][t];
    }
    for (std::size_t k = 0; k < system.num_vres(); ++k) {
      net[system.vres_bus(k)] += wind[k][t] - rt.curtail[k][t];
    }
    for (std::size_t l = 0; l < system.num_lines(); ++l) {
      const std::size_t a = system.line_from(l), z = system.line_to(l);
      const double f = (rt.delta[a][t] - rt.delta[z][t]) / system.lines()[l].reactance;
      net[a] -= f;
      net[z] += f;
    }
    for (std::size_t n = 0; n < system.num_buses(); ++n) {
      worst = std::max(worst, std::abs(net[n] + rt.shed[n][t] - load[n][t]));
    }
  }
  return worst;
}

}  // namespace vresbid
