#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vresbid/bench.hpp"
#include "vresbid/bid.hpp"
#include "vresbid/errors.hpp"
#include "vresbid/lp.hpp"
#include "vresbid/report.hpp"
#include "vresbid/study.hpp"
#include "vresbid/system.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailedPoint = 1;
constexpr int kConfigError = 2;

struct RunArgs {
  std::string config, system, scenarios, out, export_lp;
  std::vector<std::string> frameworks;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
};

struct ValidateArgs {
  std::string config, system, scenarios;
};

struct OracleArgs {
  std::string system, scenarios, out;
  double step = 1.0;
  std::size_t max_points = 1000000;
  double gamma = 1.0, xi = 1.0, voll = 1000.0;
  std::optional<std::size_t> threads;
};

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vresbid::ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw vresbid::ConfigError(path + ": " + e.what());
  }
}

vresbid::StudySpec build_spec(const RunArgs& a) {
  json j = json::object();
  fs::path base = fs::current_path();
  if (!a.config.empty()) {
    j = read_json(a.config);
    base = fs::absolute(a.config).parent_path();
  }
  if (!a.system.empty()) j["system"] = absolute(a.system);
  if (!a.scenarios.empty()) j["scenarios"] = absolute(a.scenarios);
  if (!a.out.empty()) j["output_dir"] = absolute(a.out);
  if (!a.frameworks.empty()) j["frameworks"] = a.frameworks;
  if (a.seed) j["seed"] = *a.seed;
  if (a.threads) j["config"]["threads"] = *a.threads;
  if (a.parallel) j["parallel"] = true;
  if (!j.contains("output_dir")) j["output_dir"] = absolute("vresbid_out");
  return vresbid::study_from_json(j, base);
}

int cmd_run(const RunArgs& a) {
  const vresbid::StudySpec spec = build_spec(a);
  if (!a.export_lp.empty()) {
    fs::create_directories(a.export_lp);
    vresbid::set_lp_export_directory(fs::path(a.export_lp));
  }
  const vresbid::StudyResult r = vresbid::run_study_and_write(spec);
  std::printf("%-36s %-7s %16s %16s %16s\n", "point", "frame", "total", "dam", "E[rt]");
  for (const auto& rec : r.records) {
    std::printf("%-36s %-7s %16.4f %16.4f %16.4f\n", rec.point.c_str(),
                std::string(vresbid::to_string(rec.report.framework)).c_str(),
                rec.report.total, rec.report.dam_cost, rec.report.expected_rt_cost);
  }
  for (const auto& f : r.failures) {
    std::fprintf(stderr, "failed: %s %s: %s: %s\n", f.point.c_str(), f.framework.c_str(),
                 f.error.c_str(), f.message.c_str());
  }
  std::printf("outputs written to %s\n", spec.output_dir.string().c_str());
  return r.ok() ? kOk : kFailedPoint;
}

int cmd_validate(const ValidateArgs& a) {
  std::string system = a.system, scenarios = a.scenarios;
  if (!a.config.empty()) {
    const vresbid::StudySpec spec = vresbid::load_study(a.config);
    if (system.empty()) system = spec.system.string();
    if (scenarios.empty() && spec.scenarios) scenarios = spec.scenarios->string();
    std::printf("study: %zu framework(s), %zu gamma x %zu xi x %zu count x %zu "
                "penetration x %zu line x %zu flexibility\n",
                spec.frameworks.size(), spec.gamma.size(), spec.xi.size(),
                spec.scenario_counts.size(), spec.vres_penetration.size(),
                spec.line_scale.size(), spec.flexibility.size());
  }
  if (system.empty()) throw vresbid::ConfigError("validate needs --system or --config");
  const vresbid::PowerSystem s = vresbid::load_system(system);
  std::printf("system: %zu buses, %zu lines, %zu conventional units, %zu VRES units, "
              "%zu loads\n",
              s.num_buses(), s.num_lines(), s.num_units(), s.num_vres(), s.num_loads());
  if (!scenarios.empty()) {
    const vresbid::ScenarioSet sc = vresbid::load_scenarios(scenarios, s);
    std::printf("scenarios: %zu scenarios over %zu periods\n", sc.num_scenarios(),
                sc.num_periods());
  }
  std::printf("ok\n");
  return kOk;
}

int cmd_oracle(const OracleArgs& a) {
  const vresbid::PowerSystem s = vresbid::load_system(a.system);
  const vresbid::ScenarioSet sc = vresbid::load_scenarios(a.scenarios, s);
  vresbid::RunConfig config;
  config.gamma = a.gamma;
  config.xi = a.xi;
  config.voll = a.voll;
  if (a.threads) config.threads = *a.threads;
  config.validate(s);
  vresbid::OracleOptions o;
  o.step = a.step;
  o.max_points = a.max_points;

  const vresbid::CostReport oracle = vresbid::run_oracle(s, sc, o, config);
  const vresbid::CostReport myd = vresbid::run_myd(s, sc, config);
  const vresbid::CostReport std_ = vresbid::run_std(s, sc, config);
  std::optional<vresbid::CostReport> bid;
  std::string bid_error;
  try {
    bid = vresbid::run_bid(s, sc, config);
  } catch (const vresbid::Error& e) {
    bid_error = e.what();
  }

  std::printf("%-8s %16s\n", "frame", "total");
  for (const auto* r : {&std_, &oracle, &myd}) {
    std::printf("%-8s %16.6f\n", std::string(vresbid::to_string(r->framework)).c_str(),
                r->total);
  }
  if (bid) {
    std::printf("%-8s %16.6f\n", "BiD", bid->total);
    const double gap = (bid->total - oracle.total) / std::max(1.0, std::abs(oracle.total));
    std::printf("BiD relative gap to oracle: %.6g\n", gap);
    std::printf("relaxed objective %.6f %s oracle optimum\n", *bid->relaxed_objective,
                *bid->relaxed_objective <= oracle.total + 1e-6 * (1 + std::abs(oracle.total))
                    ? "<="
                    : ">");
  } else {
    std::printf("BiD failed: %s\n", bid_error.c_str());
  }
  std::printf("oracle bids:");
  for (std::size_t k = 0; k < s.num_vres(); ++k) {
    for (double w : oracle.bids->quantity[k]) std::printf(" %s=%g", s.vres()[k].id.c_str(), w);
  }
  std::printf("\n");

  if (!a.out.empty()) {
    std::vector<vresbid::RunRecord> records;
    for (const auto* r : {&myd, &std_, &oracle}) {
      records.push_back(vresbid::make_record("oracle", {}, s, sc, *r));
    }
    std::vector<vresbid::FailureRecord> failures;
    if (bid) {
      records.push_back(vresbid::make_record("oracle", {}, s, sc, *bid));
    } else {
      failures.push_back({"oracle", {}, "BiD", "bid", bid_error});
    }
    vresbid::write_reports(a.out, s, records, failures);
  }
  return bid ? kOk : kFailedPoint;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-settlement electricity market engine with bilevel VRES bidding"};
  app.set_version_flag("--version", std::string(VRESBID_VERSION));
  app.require_subcommand(1);

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a study and write report tables");
  r->add_option("-c,--config", run.config, "Study JSON file");
  r->add_option("--system", run.system, "System JSON file (overrides the study)");
  r->add_option("--scenarios", run.scenarios, "Scenario CSV file (overrides the study)");
  r->add_option("-o,--out", run.out, "Output directory (overrides the study)");
  r->add_option("-f,--framework", run.frameworks, "myd, bid, std or oracle; repeatable");
  r->add_option("--threads", run.threads, "Worker threads, 0 for all cores");
  r->add_option("--seed", run.seed, "Sampler seed");
  r->add_flag("--parallel", run.parallel, "Run sweep points concurrently");
  r->add_option("--export-lp", run.export_lp, "Write every solved LP to this directory");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check input files without solving");
  v->add_option("-c,--config", val.config, "Study JSON file");
  v->add_option("--system", val.system, "System JSON file");
  v->add_option("--scenarios", val.scenarios, "Scenario CSV file");

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Exhaustive bid search on a tiny instance");
  o->add_option("--system", orc.system, "System JSON file")->required();
  o->add_option("--scenarios", orc.scenarios, "Scenario CSV file")->required();
  o->add_option("--step", orc.step, "Grid step in MW");
  o->add_option("--max-points", orc.max_points, "Largest grid to enumerate");
  o->add_option("--gamma", orc.gamma, "Quantity bound scale for BiD");
  o->add_option("--xi", orc.xi, "Dual bound scale for BiD");
  o->add_option("--voll", orc.voll, "Value of lost load in $/MWh");
  o->add_option("--threads", orc.threads, "Worker threads, 0 for all cores");
  o->add_option("-o,--out", orc.out, "Optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*r) return cmd_run(run);
    if (*v) return cmd_validate(val);
    if (*o) return cmd_oracle(orc);
  } catch (const vresbid::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const vresbid::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kConfigError;
  } catch (const vresbid::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kConfigError;
  } catch (const vresbid::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailedPoint;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailedPoint;
  }
  return kConfigError;
}
