#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vresbid/system.hpp"

namespace vresbid::testing {

inline std::filesystem::path fixture_path(const std::string& rel) {
  return std::filesystem::path(VRESBID_FIXTURE_DIR) / rel;
}

struct TwoBusOptions {
  double redispatch_up_cost = 30.0;
  double redispatch_down_cost = 5.0;
  double variable_cost = 10.0;
  double load = 50.0;
  double line_capacity = 100.0;
  double vres_capacity = 30.0;
  std::size_t periods = 1;
};

// One fast unit at b1, wind and load at b2, joined by one line.
inline SystemData two_bus_data(const TwoBusOptions& o = {}) {
  SystemData d;
  d.buses = {{"b1", {}}, {"b2", {"d1"}}};
  d.lines = {{"b1", "b2", 0.1, o.line_capacity}};
  ConventionalUnit g;
  g.id = "g1";
  g.bus = "b1";
  g.variable_cost = o.variable_cost;
  g.redispatch_up_cost = o.redispatch_up_cost;
  g.redispatch_down_cost = o.redispatch_down_cost;
  g.p_min = 0.0;
  g.p_max = 100.0;
  g.ramp_up = 100.0;
  g.ramp_down = 100.0;
  g.startup_class = StartupClass::kFast;
  d.conventional_units = {g};
  d.vres_units = {{"w1", "b2", o.vres_capacity}};
  d.loads = {{"d1", "b2"}};
  return d;
}

inline PowerSystem two_bus(const TwoBusOptions& o = {}) {
  return PowerSystem(two_bus_data(o));
}

// Scenarios with the given wind levels (equal weight), constant load.
inline ScenarioSet wind_scenarios(const PowerSystem& system,
                                  const std::vector<double>& wind,
                                  double load, std::size_t periods = 1) {
  ScenarioData d;
  for (std::size_t t = 0; t < periods; ++t) d.periods.push_back(int(t) + 1);
  for (std::size_t w = 0; w < wind.size(); ++w) {
    Scenario s;
    s.id = "s" + std::to_string(w + 1);
    s.weight = 1.0 / double(wind.size());
    s.vres_output = make_grid(system.num_vres(), periods, wind[w]);
    s.demand = make_grid(system.num_loads(), periods, load);
    d.scenarios.push_back(std::move(s));
  }
  return ScenarioSet(system, std::move(d));
}

inline BidVector uniform_bids(const PowerSystem& system, std::size_t periods,
                              double w) {
  return {make_grid(system.num_vres(), periods, w)};
}

}  // namespace vresbid::testing
