#include "vresbid/system.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vresbid/errors.hpp"

namespace vresbid {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt_num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

// Typed field access with "where.field" context in every error.
template <typename T>
T field(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& obj, const std::string& key, const std::string& where,
           T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return field<T>(obj, key, where);
}

const json& array_field(const json& root, const std::string& key) {
  auto it = root.find(key);
  if (it == root.end()) throw ParseError("missing top-level key '" + key + "'");
  if (!it->is_array()) throw ParseError("'" + key + "' must be an array");
  return *it;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

std::string_view to_string(StartupClass c) {
  return c == StartupClass::kFast ? "fast" : "slow";
}

StartupClass startup_class_from_string(std::string_view s) {
  if (s == "fast") return StartupClass::kFast;
  if (s == "slow") return StartupClass::kSlow;
  throw ParseError("startup_class must be 'fast' or 'slow', got '" +
                   std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// PowerSystem

PowerSystem::PowerSystem(SystemData data) : data_(std::move(data)) {
  if (data_.buses.empty()) throw ValidationError("system has no buses");

  for (std::size_t n = 0; n < data_.buses.size(); ++n) {
    const auto& id = data_.buses[n].id;
    if (id.empty()) throw ValidationError("bus id must be non-empty");
    if (!bus_lookup_.emplace(id, n).second) {
      throw ValidationError("duplicate bus id '" + id + "'");
    }
  }
  auto resolve_bus = [&](const std::string& bus, const std::string& what) {
    auto it = bus_lookup_.find(bus);
    if (it == bus_lookup_.end()) {
      throw ValidationError(what + " references unknown bus '" + bus + "'");
    }
    return it->second;
  };

  reference_bus_ = 0;
  for (std::size_t n = 1; n < data_.buses.size(); ++n) {
    if (data_.buses[n].id < data_.buses[reference_bus_].id) reference_bus_ = n;
  }

  for (std::size_t l = 0; l < data_.lines.size(); ++l) {
    const Line& line = data_.lines[l];
    const std::string what = "line " + std::to_string(l);
    line_from_.push_back(resolve_bus(line.from, what));
    line_to_.push_back(resolve_bus(line.to, what));
    if (line.from == line.to) {
      throw ValidationError(what + ": from and to must differ");
    }
    if (!(line.reactance > 0.0) || !std::isfinite(line.reactance)) {
      throw ValidationError(what + ": reactance must be > 0");
    }
    if (!finite_nonneg(line.capacity)) {
      throw ValidationError(what + ": capacity must be >= 0");
    }
  }

  std::set<std::string> unit_ids;
  for (const auto& u : data_.conventional_units) {
    const std::string what = "unit '" + u.id + "'";
    if (u.id.empty() || !unit_ids.insert(u.id).second) {
      throw ValidationError(what + ": id must be unique and non-empty");
    }
    unit_bus_.push_back(resolve_bus(u.bus, what));
    if (!finite_nonneg(u.p_min) || !finite_nonneg(u.p_max)) {
      throw ValidationError(what + ": unit bounds must be finite and >= 0");
    }
    if (u.p_min > u.p_max) {
      throw ValidationError(what + ": unit bounds violated, p_min " +
                            fmt_num(u.p_min) + " > p_max " +
                            fmt_num(u.p_max));
    }
    if (!finite_nonneg(u.ramp_up) || !finite_nonneg(u.ramp_down)) {
      throw ValidationError(what + ": ramps must be >= 0");
    }
    for (double c : {u.variable_cost, u.no_load_cost, u.startup_cost,
                     u.redispatch_up_cost, u.redispatch_down_cost}) {
      if (!finite_nonneg(c)) {
        throw ValidationError(what + ": costs must be finite and >= 0");
      }
    }
    // With C^D > C^U the re-dispatch objective is unbounded (r^U = r^D -> inf).
    if (u.redispatch_down_cost > u.redispatch_up_cost) {
      throw ValidationError(
          what + ": redispatch_down_cost must not exceed redispatch_up_cost");
    }
    if (u.initial_commitment < 0.0 || u.initial_commitment > 1.0) {
      throw ValidationError(what + ": initial_commitment must be in [0, 1]");
    }
    const double lo = u.initial_commitment * u.p_min;
    const double hi = u.initial_commitment * u.p_max;
    if (u.initial_output < lo - 1e-9 || u.initial_output > hi + 1e-9) {
      throw ValidationError(what + ": initial_output must lie in [" +
                            fmt_num(lo) + ", " + fmt_num(hi) + "]");
    }
  }

  for (std::size_t k = 0; k < data_.vres_units.size(); ++k) {
    const auto& v = data_.vres_units[k];
    const std::string what = "vres unit '" + v.id + "'";
    if (v.id.empty() || !vres_lookup_.emplace(v.id, k).second) {
      throw ValidationError(what + ": id must be unique and non-empty");
    }
    vres_bus_.push_back(resolve_bus(v.bus, what));
    if (!finite_nonneg(v.capacity)) {
      throw ValidationError(what + ": capacity must be >= 0");
    }
  }

  for (std::size_t d = 0; d < data_.loads.size(); ++d) {
    const auto& ld = data_.loads[d];
    const std::string what = "load '" + ld.id + "'";
    if (ld.id.empty() || !load_lookup_.emplace(ld.id, d).second) {
      throw ValidationError(what + ": id must be unique and non-empty");
    }
    load_bus_.push_back(resolve_bus(ld.bus, what));
  }

  // Bus load lists are optional in input; when given they must agree with
  // loads[].bus, otherwise they are derived.
  for (std::size_t n = 0; n < data_.buses.size(); ++n) {
    Bus& bus = data_.buses[n];
    std::vector<std::string> derived;
    for (std::size_t d = 0; d < data_.loads.size(); ++d) {
      if (load_bus_[d] == n) derived.push_back(data_.loads[d].id);
    }
    if (bus.loads.empty()) {
      bus.loads = derived;
      continue;
    }
    std::vector<std::string> given = bus.loads;
    std::sort(given.begin(), given.end());
    std::vector<std::string> expect = derived;
    std::sort(expect.begin(), expect.end());
    if (given != expect) {
      throw ValidationError("bus '" + bus.id +
                            "': load list disagrees with loads[].bus");
    }
  }
}

std::size_t PowerSystem::bus_index(std::string_view id) const {
  auto it = bus_lookup_.find(std::string(id));
  if (it == bus_lookup_.end()) {
    throw ValidationError("unknown bus '" + std::string(id) + "'");
  }
  return it->second;
}

std::optional<std::size_t> PowerSystem::find_vres(std::string_view id) const {
  auto it = vres_lookup_.find(std::string(id));
  if (it == vres_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> PowerSystem::find_load(std::string_view id) const {
  auto it = load_lookup_.find(std::string(id));
  if (it == load_lookup_.end()) return std::nullopt;
  return it->second;
}

double PowerSystem::max_redispatch_up_cost() const {
  double m = 0.0;
  for (const auto& u : data_.conventional_units) {
    m = std::max(m, u.redispatch_up_cost);
  }
  return m;
}

bool operator==(const SystemData& a, const SystemData& b) {
  return system_to_json(PowerSystem(a)) == system_to_json(PowerSystem(b));
}

bool operator==(const PowerSystem& a, const PowerSystem& b) {
  return system_to_json(a) == system_to_json(b);
}

PowerSystem system_from_json(const json& root) {
  if (!root.is_object()) throw ParseError("system file must be a JSON object");
  SystemData data;

  const json& buses = array_field(root, "buses");
  for (std::size_t n = 0; n < buses.size(); ++n) {
    const std::string where = "buses[" + std::to_string(n) + "]";
    Bus b;
    b.id = field<std::string>(buses[n], "id", where);
    b.loads = field_or<std::vector<std::string>>(buses[n], "loads", where, {});
    data.buses.push_back(std::move(b));
  }

  const json& lines = array_field(root, "lines");
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const std::string where = "lines[" + std::to_string(l) + "]";
    Line line;
    line.from = field<std::string>(lines[l], "from", where);
    line.to = field<std::string>(lines[l], "to", where);
    line.reactance = field<double>(lines[l], "reactance", where);
    line.capacity = field<double>(lines[l], "capacity", where);
    data.lines.push_back(std::move(line));
  }

  const json& units = array_field(root, "conventional_units");
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string where = "conventional_units[" + std::to_string(i) + "]";
    const json& j = units[i];
    ConventionalUnit u;
    u.id = field<std::string>(j, "id", where);
    u.bus = field<std::string>(j, "bus", where);
    u.variable_cost = field<double>(j, "variable_cost", where);
    u.no_load_cost = field_or<double>(j, "no_load_cost", where, 0.0);
    u.startup_cost = field_or<double>(j, "startup_cost", where, 0.0);
    u.redispatch_up_cost = field<double>(j, "redispatch_up_cost", where);
    u.redispatch_down_cost = field<double>(j, "redispatch_down_cost", where);
    u.p_min = field<double>(j, "p_min", where);
    u.p_max = field<double>(j, "p_max", where);
    u.ramp_up = field<double>(j, "ramp_up", where);
    u.ramp_down = field<double>(j, "ramp_down", where);
    try {
      u.startup_class = startup_class_from_string(
          field<std::string>(j, "startup_class", where));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    u.initial_commitment = field_or<double>(j, "initial_commitment", where, 0.0);
    u.initial_output = field_or<double>(j, "initial_output", where, 0.0);
    data.conventional_units.push_back(std::move(u));
  }

  const json& vres = array_field(root, "vres_units");
  for (std::size_t k = 0; k < vres.size(); ++k) {
    const std::string where = "vres_units[" + std::to_string(k) + "]";
    VresUnit v;
    v.id = field<std::string>(vres[k], "id", where);
    v.bus = field<std::string>(vres[k], "bus", where);
    v.capacity = field<double>(vres[k], "capacity", where);
    data.vres_units.push_back(std::move(v));
  }

  const json& loads = array_field(root, "loads");
  for (std::size_t d = 0; d < loads.size(); ++d) {
    const std::string where = "loads[" + std::to_string(d) + "]";
    Load ld;
    ld.id = field<std::string>(loads[d], "id", where);
    ld.bus = field<std::string>(loads[d], "bus", where);
    data.loads.push_back(std::move(ld));
  }

  return PowerSystem(std::move(data));
}

json system_to_json(const PowerSystem& system) {
  json root;
  root["buses"] = json::array();
  for (const auto& b : system.buses()) {
    root["buses"].push_back({{"id", b.id}, {"loads", b.loads}});
  }
  root["lines"] = json::array();
  for (const auto& l : system.lines()) {
    root["lines"].push_back({{"from", l.from},
                             {"to", l.to},
                             {"reactance", l.reactance},
                             {"capacity", l.capacity}});
  }
  root["conventional_units"] = json::array();
  for (const auto& u : system.units()) {
    root["conventional_units"].push_back(
        {{"id", u.id},
         {"bus", u.bus},
         {"variable_cost", u.variable_cost},
         {"no_load_cost", u.no_load_cost},
         {"startup_cost", u.startup_cost},
         {"redispatch_up_cost", u.redispatch_up_cost},
         {"redispatch_down_cost", u.redispatch_down_cost},
         {"p_min", u.p_min},
         {"p_max", u.p_max},
         {"ramp_up", u.ramp_up},
         {"ramp_down", u.ramp_down},
         {"startup_class", std::string(to_string(u.startup_class))},
         {"initial_commitment", u.initial_commitment},
         {"initial_output", u.initial_output}});
  }
  root["vres_units"] = json::array();
  for (const auto& v : system.vres()) {
    root["vres_units"].push_back(
        {{"id", v.id}, {"bus", v.bus}, {"capacity", v.capacity}});
  }
  root["loads"] = json::array();
  for (const auto& ld : system.loads()) {
    root["loads"].push_back({{"id", ld.id}, {"bus", ld.bus}});
  }
  return root;
}

PowerSystem load_system(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return system_from_json(root);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_system(const PowerSystem& system, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << system_to_json(system).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// ScenarioSet

ScenarioSet::ScenarioSet(const PowerSystem& system, ScenarioData data)
    : data_(std::move(data)) {
  const std::size_t T = data_.periods.size();
  if (T == 0) throw ValidationError("scenario set has no periods");
  for (std::size_t t = 1; t < T; ++t) {
    if (data_.periods[t] <= data_.periods[t - 1]) {
      throw ValidationError("periods must be strictly increasing");
    }
  }
  if (data_.scenarios.empty()) throw ValidationError("scenario set is empty");

  std::set<std::string> ids;
  double sum = 0.0;
  for (const auto& s : data_.scenarios) {
    if (s.id == "DA" || !ids.insert(s.id).second) {
      throw ValidationError("scenario id '" + s.id +
                            "' is reserved or duplicated");
    }
    if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
      throw ValidationError("scenario '" + s.id + "': weight must be > 0");
    }
    sum += s.weight;
    if (s.vres_output.size() != system.num_vres() ||
        s.demand.size() != system.num_loads()) {
      throw ValidationError("scenario '" + s.id +
                            "': element count does not match the system");
    }
    for (std::size_t k = 0; k < system.num_vres(); ++k) {
      if (s.vres_output[k].size() != T) {
        throw ValidationError("scenario '" + s.id + "': period count mismatch");
      }
      for (double v : s.vres_output[k]) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("scenario '" + s.id + "': VRES output of '" +
                                system.vres()[k].id + "' must be >= 0");
        }
        if (v > system.vres()[k].capacity + 1e-9) {
          throw ValidationError("scenario '" + s.id + "': VRES output " +
                                fmt_num(v) + " of '" + system.vres()[k].id +
                                "' exceeds capacity " +
                                fmt_num(system.vres()[k].capacity));
        }
      }
    }
    for (std::size_t d = 0; d < system.num_loads(); ++d) {
      if (s.demand[d].size() != T) {
        throw ValidationError("scenario '" + s.id + "': period count mismatch");
      }
      for (double v : s.demand[d]) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("scenario '" + s.id + "': demand of '" +
                                system.loads()[d].id + "' must be >= 0");
        }
      }
    }
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw ValidationError("scenario weights sum to " + fmt_num(sum) +
                          ", expected 1");
  }
  for (auto& s : data_.scenarios) s.weight /= sum;

  if (data_.da_demand.empty()) {
    data_.da_demand = expected_demand();
  } else {
    if (data_.da_demand.size() != system.num_loads()) {
      throw ValidationError("day-ahead forecast element count mismatch");
    }
    for (const auto& row : data_.da_demand) {
      if (row.size() != T) {
        throw ValidationError("day-ahead forecast period count mismatch");
      }
      for (double v : row) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("day-ahead forecast must be >= 0");
        }
      }
    }
  }
}

std::optional<std::size_t> ScenarioSet::find_scenario(std::string_view id) const {
  for (std::size_t w = 0; w < data_.scenarios.size(); ++w) {
    if (data_.scenarios[w].id == id) return w;
  }
  return std::nullopt;
}

Grid ScenarioSet::da_bus_demand(const PowerSystem& system) const {
  Grid out = make_grid(system.num_buses(), num_periods());
  for (std::size_t d = 0; d < system.num_loads(); ++d) {
    for (std::size_t t = 0; t < num_periods(); ++t) {
      out[system.load_bus(d)][t] += data_.da_demand[d][t];
    }
  }
  return out;
}

Grid ScenarioSet::bus_demand(const PowerSystem& system, std::size_t w) const {
  Grid out = make_grid(system.num_buses(), num_periods());
  const auto& s = data_.scenarios[w];
  for (std::size_t d = 0; d < system.num_loads(); ++d) {
    for (std::size_t t = 0; t < num_periods(); ++t) {
      out[system.load_bus(d)][t] += s.demand[d][t];
    }
  }
  return out;
}

namespace {
Grid weighted_mean(const std::vector<Scenario>& scenarios,
                   Grid Scenario::*member) {
  const Grid& first = scenarios.front().*member;
  Grid out = make_grid(first.size(), first.empty() ? 0 : first[0].size());
  for (const auto& s : scenarios) {
    const Grid& g = s.*member;
    for (std::size_t e = 0; e < g.size(); ++e) {
      for (std::size_t t = 0; t < g[e].size(); ++t) {
        out[e][t] += s.weight * g[e][t];
      }
    }
  }
  return out;
}
}  // namespace

Grid ScenarioSet::expected_vres() const {
  return weighted_mean(data_.scenarios, &Scenario::vres_output);
}

Grid ScenarioSet::expected_demand() const {
  return weighted_mean(data_.scenarios, &Scenario::demand);
}

ScenarioSet ScenarioSet::slice(const PowerSystem& system, std::size_t first,
                               std::size_t count) const {
  if (count == 0 || first + count > num_periods()) {
    throw ValidationError("period slice out of range");
  }
  auto cut = [&](const Grid& g) {
    Grid out;
    out.reserve(g.size());
    for (const auto& row : g) {
      out.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(first),
                       row.begin() + static_cast<std::ptrdiff_t>(first + count));
    }
    return out;
  };
  ScenarioData d;
  d.periods.assign(data_.periods.begin() + static_cast<std::ptrdiff_t>(first),
                   data_.periods.begin() +
                       static_cast<std::ptrdiff_t>(first + count));
  for (const auto& s : data_.scenarios) {
    d.scenarios.push_back({s.id, s.weight, cut(s.vres_output), cut(s.demand)});
  }
  d.da_demand = cut(data_.da_demand);
  return ScenarioSet(system, std::move(d));
}

// ---------------------------------------------------------------------------
// Scenario CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(where + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, const std::string& where) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(where + ": expected an integer period, got '" +
                     std::string(s) + "'");
  }
  return v;
}

struct CsvRow {
  std::string scenario;
  std::optional<double> weight;
  std::string kind;
  std::string element;
  int period = 0;
  double value = 0.0;
  std::size_t line = 0;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ScenarioSet parse_scenarios_csv(std::string_view text, const PowerSystem& system) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_csv(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      const std::vector<std::string_view> expect = {
          "scenario_id", "weight", "kind", "element_id", "period", "value_mw"};
      if (cols != expect) {
        throw ParseError(where + ": header must be " +
                         "scenario_id,weight,kind,element_id,period,value_mw");
      }
      header_seen = true;
      continue;
    }
    if (cols.size() != 6) {
      throw ParseError(where + ": expected 6 columns, got " +
                       std::to_string(cols.size()));
    }
    CsvRow r;
    r.scenario = std::string(cols[0]);
    if (!cols[1].empty()) r.weight = parse_double(cols[1], where + " weight");
    r.kind = std::string(cols[2]);
    if (r.kind != "vres" && r.kind != "load") {
      throw ParseError(where + ": kind must be 'vres' or 'load'");
    }
    r.element = std::string(cols[3]);
    r.period = parse_int(cols[4], where);
    r.value = parse_double(cols[5], where + " value_mw");
    r.line = line_no;
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("scenario CSV is empty");

  std::set<int> period_set;
  for (const auto& r : rows) period_set.insert(r.period);
  ScenarioData data;
  data.periods.assign(period_set.begin(), period_set.end());
  std::map<int, std::size_t> period_index;
  for (std::size_t t = 0; t < data.periods.size(); ++t) {
    period_index[data.periods[t]] = t;
  }
  const std::size_t T = data.periods.size();

  std::map<std::string, std::size_t> scen_index;
  std::vector<std::vector<std::vector<bool>>> seen_vres, seen_load;
  Grid da = make_grid(system.num_loads(), T);
  std::vector<std::vector<bool>> da_seen(system.num_loads(),
                                         std::vector<bool>(T, false));
  bool any_da = false;

  for (const auto& r : rows) {
    const std::string where = "line " + std::to_string(r.line);
    const std::size_t t = period_index.at(r.period);
    if (r.scenario == "DA") {
      if (r.kind != "load") {
        throw ParseError(where + ": day-ahead rows must have kind 'load'");
      }
      auto d = system.find_load(r.element);
      if (!d) throw ValidationError(where + ": unknown load id '" + r.element + "'");
      da[*d][t] = r.value;
      da_seen[*d][t] = true;
      any_da = true;
      continue;
    }
    auto [it, inserted] = scen_index.emplace(r.scenario, data.scenarios.size());
    if (inserted) {
      Scenario s;
      s.id = r.scenario;
      s.weight = r.weight.value_or(-1.0);
      s.vres_output = make_grid(system.num_vres(), T);
      s.demand = make_grid(system.num_loads(), T);
      data.scenarios.push_back(std::move(s));
      seen_vres.emplace_back(system.num_vres(), std::vector<bool>(T, false));
      seen_load.emplace_back(system.num_loads(), std::vector<bool>(T, false));
    }
    Scenario& s = data.scenarios[it->second];
    if (!r.weight) throw ParseError(where + ": scenario rows need a weight");
    if (*r.weight != s.weight) {
      throw ValidationError(where + ": inconsistent weight for scenario '" +
                            s.id + "'");
    }
    if (r.kind == "vres") {
      auto k = system.find_vres(r.element);
      if (!k) {
        throw ValidationError(where + ": unknown VRES unit id '" + r.element + "'");
      }
      s.vres_output[*k][t] = r.value;
      seen_vres[it->second][*k][t] = true;
    } else {
      auto d = system.find_load(r.element);
      if (!d) throw ValidationError(where + ": unknown load id '" + r.element + "'");
      s.demand[*d][t] = r.value;
      seen_load[it->second][*d][t] = true;
    }
  }

  for (std::size_t w = 0; w < data.scenarios.size(); ++w) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < system.num_vres(); ++k) {
        if (!seen_vres[w][k][t]) {
          throw ValidationError("scenario '" + data.scenarios[w].id +
                                "': missing VRES value for '" +
                                system.vres()[k].id + "' in period " +
                                std::to_string(data.periods[t]));
        }
      }
      for (std::size_t d = 0; d < system.num_loads(); ++d) {
        if (!seen_load[w][d][t]) {
          throw ValidationError("scenario '" + data.scenarios[w].id +
                                "': missing demand for '" +
                                system.loads()[d].id + "' in period " +
                                std::to_string(data.periods[t]));
        }
      }
    }
  }
  if (any_da) {
    for (std::size_t d = 0; d < system.num_loads(); ++d) {
      for (std::size_t t = 0; t < T; ++t) {
        if (!da_seen[d][t]) {
          throw ValidationError("day-ahead forecast missing for load '" +
                                system.loads()[d].id + "'");
        }
      }
    }
    data.da_demand = std::move(da);
  }
  return ScenarioSet(system, std::move(data));
}

ScenarioSet load_scenarios(const std::filesystem::path& path,
                           const PowerSystem& system) {
  try {
    return parse_scenarios_csv(read_file(path), system);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string scenarios_to_csv(const ScenarioSet& scenarios,
                             const PowerSystem& system) {
  std::ostringstream out;
  out << "scenario_id,weight,kind,element_id,period,value_mw\n";
  const auto& periods = scenarios.periods();
  for (std::size_t d = 0; d < system.num_loads(); ++d) {
    for (std::size_t t = 0; t < periods.size(); ++t) {
      out << "DA,,load," << system.loads()[d].id << ',' << periods[t] << ','
          << format_double(scenarios.da_demand()[d][t]) << '\n';
    }
  }
  for (const auto& s : scenarios.scenarios()) {
    const std::string w = format_double(s.weight);
    for (std::size_t k = 0; k < system.num_vres(); ++k) {
      for (std::size_t t = 0; t < periods.size(); ++t) {
        out << s.id << ',' << w << ",vres," << system.vres()[k].id << ','
            << periods[t] << ',' << format_double(s.vres_output[k][t]) << '\n';
      }
    }
    for (std::size_t d = 0; d < system.num_loads(); ++d) {
      for (std::size_t t = 0; t < periods.size(); ++t) {
        out << s.id << ',' << w << ",load," << system.loads()[d].id << ','
            << periods[t] << ',' << format_double(s.demand[d][t]) << '\n';
      }
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Sampler

BaseProfile base_profile_from(const ScenarioSet& scenarios) {
  return {scenarios.periods(), scenarios.expected_vres(),
          scenarios.expected_demand()};
}

BaseProfile load_base_profile(const std::filesystem::path& path,
                              const PowerSystem& system) {
  // Same CSV layout as scenario files; the profile is the weighted mean.
  return base_profile_from(load_scenarios(path, system));
}

namespace {

// Rejection-sampled normal on [lo, hi].
double truncated_normal(std::mt19937_64& rng, double mean, double stddev,
                        double lo, double hi) {
  if (!(stddev > 0.0)) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> normal(mean, stddev);
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  return std::clamp(mean, lo, hi);
}

}  // namespace

ScenarioSet sample_scenarios(const PowerSystem& system, const BaseProfile& base,
                             std::size_t n, std::uint64_t seed,
                             const SamplerOptions& options) {
  if (n == 0) throw ValidationError("sample_scenarios needs n >= 1");
  const std::size_t T = base.periods.size();
  if (base.vres.size() != system.num_vres() ||
      base.demand.size() != system.num_loads()) {
    throw ValidationError("base profile does not match the system");
  }
  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    for (double v : base.vres[k]) {
      if (v < -1e-9 || v > system.vres()[k].capacity + 1e-9) {
        throw ValidationError("base profile outside [0, capacity] for '" +
                              system.vres()[k].id + "'");
      }
    }
  }
  if (options.vres_relative_std < 0.0 || options.demand_relative_std < 0.0) {
    throw ValidationError("sampler standard deviations must be >= 0");
  }

  std::mt19937_64 rng(seed);
  ScenarioData data;
  data.periods = base.periods;
  data.da_demand = base.demand;
  const double weight = 1.0 / static_cast<double>(n);
  for (std::size_t w = 0; w < n; ++w) {
    Scenario s;
    s.id = "s" + std::to_string(w + 1);
    s.weight = weight;
    s.vres_output = make_grid(system.num_vres(), T);
    s.demand = make_grid(system.num_loads(), T);
    for (std::size_t k = 0; k < system.num_vres(); ++k) {
      const double cap = system.vres()[k].capacity;
      for (std::size_t t = 0; t < T; ++t) {
        const double mean = std::clamp(base.vres[k][t], 0.0, cap);
        s.vres_output[k][t] = truncated_normal(
            rng, mean, options.vres_relative_std * mean, 0.0, cap);
      }
    }
    for (std::size_t d = 0; d < system.num_loads(); ++d) {
      for (std::size_t t = 0; t < T; ++t) {
        const double mean = std::max(0.0, base.demand[d][t]);
        s.demand[d][t] =
            truncated_normal(rng, mean, options.demand_relative_std * mean, 0.0,
                             std::numeric_limits<double>::infinity());
      }
    }
    data.scenarios.push_back(std::move(s));
  }
  // n * (1/n) can miss 1 by an ulp or two; the constructor renormalizes.
  return ScenarioSet(system, std::move(data));
}

// ---------------------------------------------------------------------------
// RunConfig / BidVector

void RunConfig::validate(const PowerSystem& system) const {
  if (!std::isfinite(voll) || voll <= system.max_redispatch_up_cost()) {
    throw ValidationError("voll must exceed every redispatch_up_cost");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("gamma must be >= 0");
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ValidationError("xi must be >= 0");
  if (!(solver_tolerance > 0.0)) {
    throw ValidationError("solver_tolerance must be > 0");
  }
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  const std::string where = "config";
  c.voll = field_or<double>(j, "voll", where, c.voll);
  c.gamma = field_or<double>(j, "gamma", where, c.gamma);
  c.xi = field_or<double>(j, "xi", where, c.xi);
  c.solver_tolerance =
      field_or<double>(j, "solver_tolerance", where, c.solver_tolerance);
  c.horizon_window =
      field_or<std::size_t>(j, "horizon_window", where, c.horizon_window);
  c.seed = field_or<std::uint64_t>(j, "seed", where, c.seed);
  c.threads = field_or<std::size_t>(j, "threads", where, c.threads);
  return c;
}

json run_config_to_json(const RunConfig& c) {
  return {{"voll", c.voll},
          {"gamma", c.gamma},
          {"xi", c.xi},
          {"solver_tolerance", c.solver_tolerance},
          {"horizon_window", c.horizon_window},
          {"seed", c.seed},
          {"threads", c.threads}};
}

BidVector BidVector::zeros(const PowerSystem& system, std::size_t periods) {
  return {make_grid(system.num_vres(), periods)};
}

void BidVector::validate(const PowerSystem& system, std::size_t periods) const {
  if (quantity.size() != system.num_vres()) {
    throw ValidationError("missing bid entry: bid vector covers " +
                          std::to_string(quantity.size()) + " of " +
                          std::to_string(system.num_vres()) + " VRES units");
  }
  for (std::size_t k = 0; k < quantity.size(); ++k) {
    if (quantity[k].size() != periods) {
      throw ValidationError("missing bid entry for '" + system.vres()[k].id +
                            "'");
    }
    for (double v : quantity[k]) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("bids must be finite and >= 0");
      }
    }
  }
}

double BidVector::total() const {
  double s = 0.0;
  for (const auto& row : quantity) {
    for (double v : row) s += v;
  }
  return s;
}

}  // namespace vresbid
