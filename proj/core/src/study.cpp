#include "vresbid/study.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "vresbid/errors.hpp"

#ifndef VRESBID_VERSION
#define VRESBID_VERSION "0.0.0"
#endif

namespace vresbid {

using nlohmann::json;

std::string_view to_string(Flexibility f) {
  switch (f) {
    case Flexibility::kLow:
      return "lFlx";
    case Flexibility::kMedium:
      return "mFlx";
    case Flexibility::kHigh:
      return "hFlx";
  }
  return "unknown";
}

Flexibility flexibility_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "lflx" || lower == "low") return Flexibility::kLow;
  if (lower == "mflx" || lower == "medium") return Flexibility::kMedium;
  if (lower == "hflx" || lower == "high") return Flexibility::kHigh;
  throw ConfigError("unknown flexibility '" + std::string(s) +
                    "' (expected lFlx, mFlx or hFlx)");
}

void StudySpec::validate() const {
  if (frameworks.empty()) throw ConfigError("study needs at least one framework");
  if (!scenarios && !sampler) throw ConfigError("study needs a scenario file or a sampler");
  if (sampler && !sampler->base_profile && !scenarios) {
    throw ConfigError("sampler needs a base_profile or a scenario file");
  }
  if (sampler && sampler->count == 0) throw ConfigError("sampler.count must be >= 1");
  auto nonempty = [](bool empty, const char* name) {
    if (empty) throw ConfigError(std::string("sweep '") + name + "' must not be empty");
  };
  nonempty(gamma.empty(), "gamma");
  nonempty(xi.empty(), "xi");
  nonempty(scenario_counts.empty(), "scenario_counts");
  nonempty(vres_penetration.empty(), "vres_penetration");
  nonempty(line_scale.empty(), "line_scale");
  nonempty(flexibility.empty(), "flexibility");
  for (double g : gamma) {
    if (!(g >= 0.0)) throw ConfigError("sweep 'gamma' values must be >= 0");
  }
  for (double x : xi) {
    if (!(x >= 0.0)) throw ConfigError("sweep 'xi' values must be >= 0");
  }
  for (double p : vres_penetration) {
    if (!(p >= 0.0)) throw ConfigError("sweep 'vres_penetration' values must be >= 0");
  }
  for (double l : line_scale) {
    if (!(l > 0.0)) throw ConfigError("sweep 'line_scale' values must be > 0");
  }
  if (!(oracle.step > 0.0)) throw ConfigError("oracle_step must be > 0");
}

// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kStudyKeys = {
    "system",      "scenarios",  "sampler",      "frameworks",       "config",
    "sweeps",      "output_dir", "seed",         "oracle_step",      "oracle_max_points",
    "out_of_sample", "horizon_window", "parallel"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
std::vector<T> list(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string("'") + name + "' must be an array");
  return j.get<std::vector<T>>();
}

SamplerOptions sampler_options(const json& j, SamplerOptions o) {
  o.vres_relative_std = j.value("vres_relative_std", o.vres_relative_std);
  o.demand_relative_std = j.value("demand_relative_std", o.demand_relative_std);
  return o;
}

json sampler_options_json(const SamplerOptions& o) {
  return {{"vres_relative_std", o.vres_relative_std},
          {"demand_relative_std", o.demand_relative_std}};
}

}  // namespace

StudySpec study_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("study file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kStudyKeys.count(key)) throw ConfigError("unknown study key '" + key + "'");
  }
  StudySpec s;
  try {
    if (!j.contains("system")) throw ConfigError("study is missing 'system'");
    s.system = resolve(base_dir, j.at("system").get<std::string>());
    if (j.contains("scenarios")) {
      s.scenarios = resolve(base_dir, j.at("scenarios").get<std::string>());
    }
    if (j.contains("sampler")) {
      const json& sj = j.at("sampler");
      SamplerSpec sp;
      if (sj.contains("base_profile")) {
        sp.base_profile = resolve(base_dir, sj.at("base_profile").get<std::string>());
      }
      sp.count = sj.value("count", sp.count);
      sp.options = sampler_options(sj, sp.options);
      s.sampler = sp;
    }
    if (!j.contains("frameworks")) throw ConfigError("study is missing 'frameworks'");
    for (const auto& f : list<std::string>(j.at("frameworks"), "frameworks")) {
      s.frameworks.push_back(framework_from_string(f));
    }
    if (j.contains("config")) s.config = run_config_from_json(j.at("config"));
    if (j.contains("seed")) s.config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("horizon_window")) {
      s.config.horizon_window = j.at("horizon_window").get<std::size_t>();
    }
    s.gamma = {s.config.gamma};
    s.xi = {s.config.xi};
    s.scenario_counts = {0};
    s.vres_penetration = {0.0};
    s.line_scale = {1.0};
    s.flexibility = {Flexibility::kMedium};
    if (j.contains("sweeps")) {
      const json& w = j.at("sweeps");
      if (!w.is_object()) throw ConfigError("'sweeps' must be an object");
      for (const auto& [key, value] : w.items()) {
        if (key == "gamma") {
          s.gamma = list<double>(value, "gamma");
        } else if (key == "xi") {
          s.xi = list<double>(value, "xi");
        } else if (key == "scenario_counts") {
          s.scenario_counts = list<std::size_t>(value, "scenario_counts");
        } else if (key == "vres_penetration") {
          s.vres_penetration = list<double>(value, "vres_penetration");
        } else if (key == "line_scale") {
          s.line_scale = list<double>(value, "line_scale");
        } else if (key == "flexibility") {
          s.flexibility.clear();
          for (const auto& f : list<std::string>(value, "flexibility")) {
            s.flexibility.push_back(flexibility_from_string(f));
          }
        } else {
          throw ConfigError("unknown sweep '" + key + "'");
        }
      }
    }
    s.oracle.step = j.value("oracle_step", s.oracle.step);
    s.oracle.max_points = j.value("oracle_max_points", s.oracle.max_points);
    if (j.contains("out_of_sample")) {
      const json& o = j.at("out_of_sample");
      s.out_of_sample.tests = o.value("tests", s.out_of_sample.tests);
      s.out_of_sample.scenarios = o.value("scenarios", s.out_of_sample.scenarios);
      s.out_of_sample.options = sampler_options(o, s.out_of_sample.options);
    }
    if (j.contains("output_dir")) {
      s.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    }
    s.parallel = j.value("parallel", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("study file: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  s.validate();
  return s;
}

StudySpec load_study(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("study file " + path.string() + ": " + e.what());
  }
  return study_from_json(j, path.parent_path());
}

json study_to_json(const StudySpec& s) {
  json j;
  j["system"] = s.system.generic_string();
  if (s.scenarios) j["scenarios"] = s.scenarios->generic_string();
  if (s.sampler) {
    json sj = sampler_options_json(s.sampler->options);
    sj["count"] = s.sampler->count;
    if (s.sampler->base_profile) sj["base_profile"] = s.sampler->base_profile->generic_string();
    j["sampler"] = sj;
  }
  json fw = json::array();
  for (Framework f : s.frameworks) fw.push_back(std::string(to_string(f)));
  j["frameworks"] = fw;
  j["config"] = run_config_to_json(s.config);
  json flex = json::array();
  for (Flexibility f : s.flexibility) flex.push_back(std::string(to_string(f)));
  j["sweeps"] = {{"gamma", s.gamma},
                 {"xi", s.xi},
                 {"scenario_counts", s.scenario_counts},
                 {"vres_penetration", s.vres_penetration},
                 {"line_scale", s.line_scale},
                 {"flexibility", flex}};
  j["oracle_step"] = s.oracle.step;
  j["oracle_max_points"] = s.oracle.max_points;
  json oos = sampler_options_json(s.out_of_sample.options);
  oos["tests"] = s.out_of_sample.tests;
  oos["scenarios"] = s.out_of_sample.scenarios;
  j["out_of_sample"] = oos;
  if (!s.output_dir.empty()) j["output_dir"] = s.output_dir.generic_string();
  j["parallel"] = s.parallel;
  return j;
}

// ---------------------------------------------------------------------------

PowerSystem scale_lines(const PowerSystem& system, double factor) {
  if (!(factor > 0.0)) throw ValidationError("line scale must be > 0");
  SystemData d = system.data();
  for (auto& l : d.lines) l.capacity *= factor;
  return PowerSystem(std::move(d));
}

PowerSystem apply_flexibility(const PowerSystem& system, Flexibility f) {
  if (f == Flexibility::kMedium) return system;
  SystemData d = system.data();
  for (auto& u : d.conventional_units) {
    u.startup_class = f == Flexibility::kLow ? StartupClass::kSlow : StartupClass::kFast;
  }
  return PowerSystem(std::move(d));
}

double penetration_factor(const ScenarioSet& scenarios, double percent) {
  if (!(percent >= 0.0)) throw ValidationError("VRES penetration must be >= 0");
  double vres = 0.0, demand = 0.0;
  for (std::size_t w = 0; w < scenarios.num_scenarios(); ++w) {
    const Scenario& s = scenarios.scenario(w);
    for (const auto& row : s.vres_output) {
      for (double v : row) vres += s.weight * v;
    }
    for (const auto& row : s.demand) {
      for (double v : row) demand += s.weight * v;
    }
  }
  if (!(vres > 0.0)) {
    throw ValidationError("cannot scale VRES penetration: expected VRES energy is zero");
  }
  return percent / 100.0 * demand / vres;
}

PowerSystem scale_vres_capacity(const PowerSystem& system, double factor) {
  if (!(factor >= 0.0)) throw ValidationError("VRES scale must be >= 0");
  SystemData d = system.data();
  for (auto& k : d.vres_units) k.capacity *= factor;
  return PowerSystem(std::move(d));
}

ScenarioSet scale_vres_output(const PowerSystem& scaled, const ScenarioSet& scenarios,
                              double factor) {
  ScenarioData d = scenarios.data();
  for (auto& s : d.scenarios) {
    for (auto& row : s.vres_output) {
      for (double& v : row) v *= factor;
    }
  }
  return ScenarioSet(scaled, std::move(d));
}

ScenarioSet first_scenarios(const PowerSystem& system, const ScenarioSet& scenarios,
                            std::size_t count) {
  if (count == 0 || count == scenarios.num_scenarios()) {
    return ScenarioSet(system, scenarios.data());
  }
  if (count > scenarios.num_scenarios()) {
    throw ValidationError("requested " + std::to_string(count) + " scenarios but only " +
                          std::to_string(scenarios.num_scenarios()) + " are available");
  }
  ScenarioData d = scenarios.data();
  d.scenarios.resize(count);
  double total = 0.0;
  for (const auto& s : d.scenarios) total += s.weight;
  for (auto& s : d.scenarios) s.weight /= total;
  return ScenarioSet(system, std::move(d));
}

// ---------------------------------------------------------------------------

namespace {

struct Point {
  std::string label;
  json parameters;
  std::optional<PowerSystem> system;
  std::optional<ScenarioSet> scenarios;
  std::vector<ScenarioSet> tests;
  std::string error, message;
};

struct Task {
  std::size_t point = 0;
  Framework framework = Framework::kMyd;
  double gamma = 0.0, xi = 0.0;
  bool bid_sweep = false;
};

struct Outcome {
  std::optional<RunRecord> record;
  std::optional<FailureRecord> failure;
};

std::pair<std::string, std::string> classify(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ParseError& e) {
    return {"parse", e.what()};
  } catch (const ValidationError& e) {
    return {"validation", e.what()};
  } catch (const InfeasibleError& e) {
    return {"infeasible", e.what()};
  } catch (const SolverError& e) {
    return {"solver", e.what()};
  } catch (const ConfigError& e) {
    return {"config", e.what()};
  } catch (const std::exception& e) {
    return {"internal", e.what()};
  }
}

std::string point_label(Flexibility f, double line, double pen, std::size_t n) {
  std::string s = std::string(to_string(f)) + "-" + format_number(line) + "L-";
  s += pen > 0.0 ? format_number(pen) + "R" : std::string("baseR");
  s += "-n" + (n ? std::to_string(n) : std::string("all"));
  return s;
}

Outcome run_task(const StudySpec& spec, const Point& p, const Task& task,
                 std::size_t threads) {
  Outcome out;
  std::string label = p.label;
  json params = p.parameters;
  if (task.bid_sweep) {
    label += "-g" + format_number(task.gamma) + "-x" + format_number(task.xi);
    params["gamma"] = task.gamma;
    params["xi"] = task.xi;
  }
  try {
    RunConfig config = spec.config;
    config.gamma = task.gamma;
    config.xi = task.xi;
    config.threads = threads;
    const PowerSystem& sys = *p.system;
    const ScenarioSet& sc = *p.scenarios;
    const std::size_t T = sc.num_periods();
    CostReport report =
        config.horizon_window > 0 && config.horizon_window < T
            ? rolling_horizon(sys, sc, config.horizon_window, task.framework, config,
                              spec.oracle)
                  .stitched
            : run_framework(task.framework, sys, sc, config, spec.oracle);
    std::optional<OutOfSample> oos;
    if (!p.tests.empty()) oos = out_of_sample(sys, report, p.tests, config);
    RunRecord rec = make_record(label, params, sys, sc, std::move(report));
    rec.out_of_sample = std::move(oos);
    out.record = std::move(rec);
  } catch (...) {
    auto [kind, msg] = classify(std::current_exception());
    out.failure = FailureRecord{label, params, std::string(to_string(task.framework)), kind,
                                msg};
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudySpec& spec) {
  spec.validate();
  const PowerSystem base = load_system(spec.system);
  std::optional<ScenarioSet> file;
  if (spec.scenarios) file = load_scenarios(*spec.scenarios, base);
  std::optional<BaseProfile> profile;
  if (spec.sampler) {
    profile = spec.sampler->base_profile ? load_base_profile(*spec.sampler->base_profile, base)
                                         : base_profile_from(*file);
  }

  std::vector<Point> points;
  for (Flexibility flex : spec.flexibility) {
    for (double line : spec.line_scale) {
      for (double pen : spec.vres_penetration) {
        for (std::size_t n : spec.scenario_counts) {
          Point p;
          p.label = point_label(flex, line, pen, n);
          p.parameters = {{"flexibility", std::string(to_string(flex))},
                          {"line_scale", line},
                          {"vres_penetration", pen},
                          {"scenario_count", n}};
          try {
            const ScenarioSet raw =
                spec.sampler ? sample_scenarios(base, *profile, n ? n : spec.sampler->count,
                                                spec.config.seed, spec.sampler->options)
                             : first_scenarios(base, *file, n);
            const double factor = pen > 0.0 ? penetration_factor(raw, pen) : 1.0;
            p.parameters["vres_factor"] = factor;
            const PowerSystem sys = apply_flexibility(
                scale_lines(scale_vres_capacity(base, factor), line), flex);
            p.scenarios = scale_vres_output(sys, raw, factor);
            if (spec.out_of_sample.tests > 0) {
              const BaseProfile bp = base_profile_from(*p.scenarios);
              const std::size_t m = spec.out_of_sample.scenarios
                                        ? spec.out_of_sample.scenarios
                                        : p.scenarios->num_scenarios();
              for (std::size_t i = 0; i < spec.out_of_sample.tests; ++i) {
                p.tests.push_back(sample_scenarios(sys, bp, m, spec.config.seed + 1 + i,
                                                   spec.out_of_sample.options));
              }
            }
            p.system = sys;
          } catch (...) {
            std::tie(p.error, p.message) = classify(std::current_exception());
          }
          points.push_back(std::move(p));
        }
      }
    }
  }

  const bool bid_sweep = spec.gamma.size() > 1 || spec.xi.size() > 1;
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (Framework f : spec.frameworks) {
      if (f == Framework::kBid) {
        for (double g : spec.gamma) {
          for (double x : spec.xi) tasks.push_back({i, f, g, x, bid_sweep});
        }
      } else {
        tasks.push_back({i, f, spec.gamma.front(), spec.xi.front(), false});
      }
    }
  }

  std::vector<Outcome> outcomes(tasks.size());
  auto execute = [&](std::size_t t, std::size_t threads) {
    const Point& p = points[tasks[t].point];
    if (!p.error.empty()) {
      outcomes[t].failure = FailureRecord{p.label, p.parameters,
                                          std::string(to_string(tasks[t].framework)),
                                          p.error, p.message};
      return;
    }
    outcomes[t] = run_task(spec, p, tasks[t], threads);
  };
  if (spec.parallel) {
    detail::parallel_for(tasks.size(), spec.config.threads,
                         [&](std::size_t t) { execute(t, 1); });
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t) execute(t, spec.config.threads);
  }

  StudyResult result;
  std::vector<PointSummary> summaries(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    summaries[i].label = points[i].label;
    summaries[i].parameters = points[i].parameters;
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    PointSummary& s = summaries[tasks[t].point];
    if (outcomes[t].record) {
      result.records.push_back(std::move(*outcomes[t].record));
      ++s.runs;
    } else {
      result.failures.push_back(std::move(*outcomes[t].failure));
      ++s.failures;
    }
  }
  result.points = std::move(summaries);

  json pts = json::array();
  for (const auto& s : result.points) {
    pts.push_back({{"label", s.label},
                   {"parameters", s.parameters},
                   {"runs", s.runs},
                   {"failures", s.failures}});
  }
  json fails = json::array();
  for (const auto& f : result.failures) {
    fails.push_back({{"point", f.point},
                     {"framework", f.framework},
                     {"error", f.error},
                     {"message", f.message}});
  }
  result.manifest = {{"software", "vresbid"},
                     {"version", VRESBID_VERSION},
                     {"seed", spec.config.seed},
                     {"config", run_config_to_json(spec.config)},
                     {"study", study_to_json(spec)},
                     {"points", pts},
                     {"failures", fails},
                     {"status", result.ok() ? "ok" : "failed"}};
  return result;
}

StudyResult run_study_and_write(const StudySpec& spec) {
  if (spec.output_dir.empty()) throw ConfigError("study has no output_dir");
  StudyResult r = run_study(spec);
  const PowerSystem system = load_system(spec.system);
  write_reports(spec.output_dir, system, r.records, r.failures);
  std::ofstream m(spec.output_dir / "manifest.json", std::ios::binary);
  if (!m) throw ConfigError("cannot write manifest.json");
  m << r.manifest.dump(2) << '\n';
  return r;
}

}  // namespace vresbid
