#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vresbid {

// Dense [element][period] table. Element order follows the owning container.
using Grid = std::vector<std::vector<double>>;

inline Grid make_grid(std::size_t rows, std::size_t cols, double value = 0.0) {
  return Grid(rows, std::vector<double>(cols, value));
}

enum class StartupClass { kFast, kSlow };

std::string_view to_string(StartupClass c);
StartupClass startup_class_from_string(std::string_view s);

struct Bus {
  std::string id;
  std::vector<std::string> loads;
};

struct Line {
  std::string from;
  std::string to;
  double reactance = 0.0;  // per unit, > 0
  double capacity = 0.0;   // MW
};

struct ConventionalUnit {
  std::string id;
  std::string bus;
  double variable_cost = 0.0;         // $/MWh
  double no_load_cost = 0.0;          // $/h at full commitment
  double startup_cost = 0.0;          // $ per full start
  double redispatch_up_cost = 0.0;    // $/MWh
  double redispatch_down_cost = 0.0;  // $/MWh saved when backing down
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;    // MW/h
  double ramp_down = 0.0;  // MW/h
  StartupClass startup_class = StartupClass::kSlow;
  double initial_commitment = 0.0;  // u at t = 0, in [0, 1]
  double initial_output = 0.0;      // p at t = 0, MW
};

struct VresUnit {
  std::string id;
  std::string bus;
  double capacity = 0.0;  // MW
};

struct Load {
  std::string id;
  std::string bus;
};

// Raw network description; PowerSystem validates and indexes it.
struct SystemData {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ConventionalUnit> conventional_units;
  std::vector<VresUnit> vres_units;
  std::vector<Load> loads;
};

// Validated, immutable grid model. Index-based accessors resolve every
// cross reference once at construction.
class PowerSystem {
 public:
  explicit PowerSystem(SystemData data);

  const SystemData& data() const { return data_; }
  const std::vector<Bus>& buses() const { return data_.buses; }
  const std::vector<Line>& lines() const { return data_.lines; }
  const std::vector<ConventionalUnit>& units() const {
    return data_.conventional_units;
  }
  const std::vector<VresUnit>& vres() const { return data_.vres_units; }
  const std::vector<Load>& loads() const { return data_.loads; }

  std::size_t num_buses() const { return data_.buses.size(); }
  std::size_t num_lines() const { return data_.lines.size(); }
  std::size_t num_units() const { return data_.conventional_units.size(); }
  std::size_t num_vres() const { return data_.vres_units.size(); }
  std::size_t num_loads() const { return data_.loads.size(); }

  std::size_t bus_index(std::string_view id) const;
  std::optional<std::size_t> find_vres(std::string_view id) const;
  std::optional<std::size_t> find_load(std::string_view id) const;

  std::size_t unit_bus(std::size_t i) const { return unit_bus_[i]; }
  std::size_t vres_bus(std::size_t k) const { return vres_bus_[k]; }
  std::size_t load_bus(std::size_t d) const { return load_bus_[d]; }
  std::size_t line_from(std::size_t l) const { return line_from_[l]; }
  std::size_t line_to(std::size_t l) const { return line_to_[l]; }

  // Bus whose angle is pinned to zero: the lexicographically smallest id.
  std::size_t reference_bus() const { return reference_bus_; }

  double max_redispatch_up_cost() const;

  friend bool operator==(const PowerSystem& a, const PowerSystem& b);

 private:
  SystemData data_;
  std::unordered_map<std::string, std::size_t> bus_lookup_;
  std::unordered_map<std::string, std::size_t> vres_lookup_;
  std::unordered_map<std::string, std::size_t> load_lookup_;
  std::vector<std::size_t> unit_bus_;
  std::vector<std::size_t> vres_bus_;
  std::vector<std::size_t> load_bus_;
  std::vector<std::size_t> line_from_;
  std::vector<std::size_t> line_to_;
  std::size_t reference_bus_ = 0;
};

bool operator==(const SystemData& a, const SystemData& b);

PowerSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const PowerSystem& system);
PowerSystem load_system(const std::filesystem::path& path);
void save_system(const PowerSystem& system, const std::filesystem::path& path);

struct Scenario {
  std::string id;
  double weight = 0.0;
  Grid vres_output;  // [vres][period], MW
  Grid demand;       // [load][period], MW
};

struct ScenarioData {
  std::vector<int> periods;  // external period labels, strictly increasing
  std::vector<Scenario> scenarios;
  // Day-ahead load forecast [load][period]. Empty means "use the scenario
  // mean".
  Grid da_demand;
};

// Weighted VRES/demand realizations over a fixed set of hourly periods,
// checked against a PowerSystem at construction.
class ScenarioSet {
 public:
  ScenarioSet(const PowerSystem& system, ScenarioData data);

  const ScenarioData& data() const { return data_; }
  std::size_t num_periods() const { return data_.periods.size(); }
  std::size_t num_scenarios() const { return data_.scenarios.size(); }
  const std::vector<int>& periods() const { return data_.periods; }
  const Scenario& scenario(std::size_t w) const { return data_.scenarios[w]; }
  const std::vector<Scenario>& scenarios() const { return data_.scenarios; }
  double weight(std::size_t w) const { return data_.scenarios[w].weight; }
  std::optional<std::size_t> find_scenario(std::string_view id) const;

  // Day-ahead forecast per load and per bus.
  const Grid& da_demand() const { return data_.da_demand; }
  Grid da_bus_demand(const PowerSystem& system) const;
  // Realized demand per bus for one scenario.
  Grid bus_demand(const PowerSystem& system, std::size_t w) const;

  // Probability-weighted mean VRES output [vres][period].
  Grid expected_vres() const;
  Grid expected_demand() const;

  // Contiguous period slice [first, first + count).
  ScenarioSet slice(const PowerSystem& system, std::size_t first,
                    std::size_t count) const;

 private:
  ScenarioData data_;
};

inline constexpr double kWeightTolerance = 1e-9;

ScenarioSet load_scenarios(const std::filesystem::path& path,
                           const PowerSystem& system);
ScenarioSet parse_scenarios_csv(std::string_view text,
                                const PowerSystem& system);
std::string scenarios_to_csv(const ScenarioSet& scenarios,
                             const PowerSystem& system);

// Mean trace the sampler perturbs. Rows follow system order.
struct BaseProfile {
  std::vector<int> periods;
  Grid vres;    // [vres][period]
  Grid demand;  // [load][period]
};

struct SamplerOptions {
  double vres_relative_std = 0.3;
  double demand_relative_std = 0.0;
};

BaseProfile base_profile_from(const ScenarioSet& scenarios);
BaseProfile load_base_profile(const std::filesystem::path& path,
                              const PowerSystem& system);

// n equal-weight scenarios drawn from independent Gaussians truncated to
// [0, capacity] (VRES) and [0, inf) (demand). Pure function of its inputs.
ScenarioSet sample_scenarios(const PowerSystem& system,
                             const BaseProfile& base, std::size_t n,
                             std::uint64_t seed,
                             const SamplerOptions& options = {});

struct RunConfig {
  double voll = 1000.0;  // $/MWh
  double gamma = 1.0;
  double xi = 1.0;
  double solver_tolerance = 1e-7;
  std::size_t horizon_window = 0;  // 0: whole horizon in one window
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate(const PowerSystem& system) const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& c);

// Day-ahead VRES quantity offers W[k][t].
struct BidVector {
  Grid quantity;

  static BidVector zeros(const PowerSystem& system, std::size_t periods);
  void validate(const PowerSystem& system, std::size_t periods) const;
  double total() const;
};

}  // namespace vresbid
