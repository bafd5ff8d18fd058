// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "vresbid/bench.hpp"
#include "vresbid/bid.hpp"
#include "vresbid/dam.hpp"
#include "vresbid/errors.hpp"
#include "vresbid/report.hpp"
#include "vresbid/study.hpp"

namespace {

using namespace vresbid;
using testing::fixture_path;
using testing::TwoBusOptions;
using testing::two_bus;
using testing::uniform_bids;
using testing::wind_scenarios;

struct Case {
  std::string name;
  PowerSystem system;
  ScenarioSet scenarios;
  RunConfig config;
};

bool leq(double a, double b, double rel = 1e-6) {
  return a <= b + rel * std::max(1.0, std::abs(b));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RunConfig with_gamma(double g) {
  RunConfig c;
  c.gamma = g;
  return c;
}

Case two_bus_case(double cu) {
  TwoBusOptions o;
  o.redispatch_up_cost = cu;
  PowerSystem s = two_bus(o);
  ScenarioSet sc = wind_scenarios(s, {30, 0}, 50);
  return {"two_bus_cu" + fmt("%g", cu), s, sc, with_gamma(2.0)};
}

Case five_bus_case(const std::string& name, Flexibility flex, double line) {
  const PowerSystem base = load_system(fixture_path("five_bus/system.json"));
  PowerSystem s = apply_flexibility(scale_lines(base, line), flex);
  ScenarioSet sc = load_scenarios(fixture_path("five_bus/scenarios.csv"), s);
  return {name, s, sc, RunConfig{}};
}

std::vector<Case> fixture_suite() {
  std::vector<Case> v{two_bus_case(30), two_bus_case(12)};
  v.push_back(five_bus_case("five_bus", Flexibility::kMedium, 1.0));
  v.push_back(five_bus_case("five_bus_lflx", Flexibility::kLow, 1.0));
  v.push_back(five_bus_case("five_bus_hflx", Flexibility::kHigh, 1.0));
  v.push_back(five_bus_case("five_bus_half_lines", Flexibility::kMedium, 0.5));
  return v;
}

// Random 3-5 bus system with 2-5 scenarios whose zero-bid day-ahead market
// is feasible.
Case random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  for (int attempt = 0;; ++attempt) {
    const int nb = pick(3, 5), T = 3, S = pick(2, 5);
    SystemData d;
    for (int n = 0; n < nb; ++n) {
      d.buses.push_back({"b" + std::to_string(n + 1), {"d" + std::to_string(n + 1)}});
      d.loads.push_back({"d" + std::to_string(n + 1), "b" + std::to_string(n + 1)});
    }
    Grid load = make_grid(nb, T);
    double peak = 0.0;
    for (int t = 0; t < T; ++t) {
      double total = 0.0;
      for (int n = 0; n < nb; ++n) total += (load[n][t] = uni(10, 60));
      peak = std::max(peak, total);
    }
    for (int n = 1; n < nb; ++n) {
      d.lines.push_back({"b" + std::to_string(n), "b" + std::to_string(n + 1), uni(0.05, 0.3),
                         uni(0.4, 1.2) * peak});
    }
    if (nb > 3) d.lines.push_back({"b1", "b" + std::to_string(nb), uni(0.05, 0.3), uni(0.4, 1.2) * peak});
    const int units = pick(2, 4);
    double capacity = 0.0;
    for (int i = 0; i < units; ++i) {
      ConventionalUnit g;
      g.id = "g" + std::to_string(i + 1);
      g.bus = "b" + std::to_string(pick(1, nb));
      g.variable_cost = uni(10, 40);
      g.no_load_cost = pick(0, 1) ? uni(0, 40) : 0.0;
      g.startup_cost = pick(0, 1) ? uni(0, 150) : 0.0;
      g.redispatch_up_cost = g.variable_cost + uni(5, 80);
      g.redispatch_down_cost = uni(1, 0.8 * g.variable_cost);
      g.p_max = uni(0.5, 1.2) * peak;
      g.p_min = pick(0, 1) ? uni(0, 0.2) * g.p_max : 0.0;
      g.ramp_up = g.ramp_down = uni(0.5, 1.0) * g.p_max;
      g.startup_class = pick(0, 1) ? StartupClass::kFast : StartupClass::kSlow;
      g.initial_commitment = pick(0, 1);
      g.initial_output = g.initial_commitment * g.p_min;
      capacity += g.p_max;
      d.conventional_units.push_back(g);
    }
    const int nk = pick(1, 2);
    for (int k = 0; k < nk; ++k) {
      d.vres_units.push_back({"w" + std::to_string(k + 1), "b" + std::to_string(pick(1, nb)),
                              uni(0.2, 0.6) * peak});
    }
    if (capacity < 1.3 * peak) continue;
    PowerSystem s(d);
    ScenarioData sd;
    for (int t = 0; t < T; ++t) sd.periods.push_back(t + 1);
    std::vector<double> w(S);
    double wsum = 0.0;
    for (auto& x : w) wsum += (x = uni(0.5, 1.5));
    for (int o = 0; o < S; ++o) {
      Scenario sc;
      sc.id = "s" + std::to_string(o + 1);
      sc.weight = w[o] / wsum;
      sc.vres_output = make_grid(nk, T);
      for (int k = 0; k < nk; ++k) {
        for (int t = 0; t < T; ++t) sc.vres_output[k][t] = uni(0, d.vres_units[k].capacity);
      }
      sc.demand = load;
      sd.scenarios.push_back(sc);
    }
    double renorm = 0.0;
    for (const auto& sc : sd.scenarios) renorm += sc.weight;
    sd.scenarios.back().weight += 1.0 - renorm;
    ScenarioSet set(s, sd);
    try {
      solve_dam(s, set, BidVector::zeros(s, T));
    } catch (const InfeasibleError&) {
      continue;
    }
    return {"random_" + std::to_string(seed) + (attempt ? "_" + std::to_string(attempt) : ""),
            s, set, RunConfig{}};
  }
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------

Outcome sandwich() {
  std::vector<Case> cases = fixture_suite();
  for (std::uint64_t s = 0; s < 25; ++s) cases.push_back(random_case(1000 + s));
  int checked = 0;
  std::vector<std::string> bad;
  for (const auto& c : cases) {
    try {
      const double st = run_std(c.system, c.scenarios, c.config).total;
      const double my = run_myd(c.system, c.scenarios, c.config).total;
      const double bi = run_bid(c.system, c.scenarios, c.config).total;
      if (!leq(st, bi) || !leq(st, my)) {
        bad.push_back(c.name + " (StD " + fmt("%.6f", st) + ", BiD " + fmt("%.6f", bi) +
                      ", MyD " + fmt("%.6f", my) + ")");
      }
      ++checked;
    } catch (const std::exception& e) {
      bad.push_back(c.name + " error: " + e.what());
    }
  }
  std::string detail = std::to_string(checked) + "/" + std::to_string(cases.size()) +
                       " systems satisfy StD <= BiD and StD <= MyD";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

Outcome oracle_agreement() {
  bool ok = true;
  std::string detail;
  for (double cu : {30.0, 12.0}) {
    const Case c = two_bus_case(cu);
    const double bid = run_bid(c.system, c.scenarios, c.config).total;
    const CostReport o = run_oracle(c.system, c.scenarios, {}, c.config);
    const double derived =
        cu == 30.0 ? 425.0 : evaluate_bids(c.system, c.scenarios, uniform_bids(c.system, 1, 30));
    const bool here = std::abs(bid - o.total) <= 0.01 * std::abs(o.total) &&
                      std::abs(o.total - derived) <= 1e-6 * std::abs(derived);
    ok = ok && here;
    detail += "C^U=" + fmt("%g", cu) + ": BiD " + fmt("%.4f", bid) + " oracle " +
              fmt("%.4f", o.total) + " at W=" + fmt("%g", o.bids->quantity[0][0]) +
              " derived " + fmt("%.4f", derived) + "; ";
  }
  return {ok, detail};
}

Outcome relaxation_lower_bound() {
  std::vector<Case> tiny{two_bus_case(30), two_bus_case(12)};
  std::mt19937_64 rng(77);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  for (int i = 0; i < 6; ++i) {
    TwoBusOptions o;
    o.variable_cost = uni(5, 25);
    o.redispatch_up_cost = o.variable_cost + uni(1, 40);
    o.redispatch_down_cost = uni(1, o.variable_cost);
    o.periods = i % 2 + 1;
    const PowerSystem s = two_bus(o);
    std::vector<double> winds;
    const int n = 2 + i % 3;
    for (int k = 0; k < n; ++k) winds.push_back(std::round(uni(0, 30)));
    tiny.push_back({"tiny_" + std::to_string(i), s, wind_scenarios(s, winds, 50, o.periods),
                    with_gamma(uni(1.0, 2.0))});
  }
  bool ok = true;
  std::string detail;
  double worst = -1e300;
  for (const auto& c : tiny) {
    const BidResult b = solve_bid(c.system, c.scenarios, c.config);
    OracleOptions oo;
    oo.upper = b.bounds.w_hi;
    const double oracle = run_oracle(c.system, c.scenarios, oo, c.config).total;
    worst = std::max(worst, b.relaxed_objective - oracle);
    if (!leq(b.relaxed_objective, oracle)) {
      ok = false;
      detail += c.name + " relaxed " + fmt("%.6f", b.relaxed_objective) + " > oracle " +
                fmt("%.6f", oracle) + "; ";
    }
  }
  detail += std::to_string(tiny.size()) + " instances, max(relaxed - oracle) = " +
            fmt("%.6g", worst);
  return {ok, detail};
}

Outcome bid_beats_myd() {
  const Case c = five_bus_case("five_bus", Flexibility::kMedium, 1.0);
  const double my = run_myd(c.system, c.scenarios, c.config).total;
  const double bi = run_bid(c.system, c.scenarios, c.config).total;
  const double st = run_std(c.system, c.scenarios, c.config).total;
  return {bi <= 0.95 * my, "MyD " + fmt("%.2f", my) + ", BiD " + fmt("%.2f", bi) + ", StD " +
                               fmt("%.2f", st) + ", reduction " +
                               fmt("%.2f", 100.0 * (my - bi) / my) + "%"};
}

Outcome duality_and_stationarity() {
  std::vector<Case> cases = fixture_suite();
  std::size_t count = 0;
  double worst_sd = 0.0, worst_st = 0.0;
  auto check = [&](const Case& c, const DamSolution& d) {
    ++count;
    worst_sd = std::max(worst_sd, check_strong_duality(*d.model, d.lp));
    worst_sd = std::max(worst_sd, dam_duality_gap(c.system, c.scenarios, d));
    worst_st = std::max(worst_st, dam_stationarity(c.system, d).max());
  };
  for (const auto& c : cases) {
    check(c, run_myd(c.system, c.scenarios, c.config).dam);
    check(c, run_bid(c.system, c.scenarios, c.config).dam);
    check(c, solve_dam(c.system, c.scenarios, BidVector::zeros(c.system, c.scenarios.num_periods())));
    if (c.system.num_vres() * c.scenarios.num_periods() == 1) {
      check(c, run_oracle(c.system, c.scenarios, {}, c.config).dam);
    }
  }
  return {worst_sd <= 1e-6 && worst_st <= 1e-6,
          std::to_string(count) + " DAM solves, max strong-duality residual " +
              fmt("%.3g", worst_sd) + ", max stationarity residual " + fmt("%.3g", worst_st)};
}

Outcome envelope_validity() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t boxes = 0, points = 0, violations = 0;
  for (const auto& c : fixture_suite()) {
    const McCormickBounds b = make_bounds(c.system, c.scenarios, c.config);
    for (std::size_t k = 0; k < b.w_hi.size(); ++k) {
      for (std::size_t t = 0; t < b.w_hi[k].size(); ++t) {
        ++boxes;
        const double wl = b.w_lo[k][t], wu = b.w_hi[k][t];
        const double ll = b.lambda_lo[k][t], lu = b.lambda_hi[k][t];
        const double scale = std::max(1.0, wu * lu);
        for (int i = 0; i < 10000; ++i, ++points) {
          const double w = wl + (wu - wl) * u(rng), lam = ll + (lu - ll) * u(rng);
          for (double s : mccormick_slacks(w, lam, w * lam, wl, wu, ll, lu)) {
            if (s < -1e-12 * scale) ++violations;
          }
        }
      }
    }
  }
  return {violations == 0, std::to_string(points) + " points in " + std::to_string(boxes) +
                               " boxes, " + std::to_string(violations) + " violations"};
}

Outcome gamma_robustness() {
  const Case c = five_bus_case("five_bus", Flexibility::kMedium, 1.0);
  std::vector<double> costs;
  std::string detail;
  for (double g : {0.2, 0.6, 1.0, 1.4}) {
    RunConfig cfg = c.config;
    cfg.gamma = g;
    costs.push_back(run_bid(c.system, c.scenarios, cfg).total);
    detail += "gamma " + fmt("%g", g) + ": " + fmt("%.2f", costs.back()) + "; ";
  }
  const double best = *std::min_element(costs.begin(), costs.end());
  const double worst = *std::max_element(costs.begin(), costs.end());
  detail += "worst/best - 1 = " + fmt("%.4f", worst / best - 1.0);
  return {worst <= 1.10 * best, detail};
}

Outcome xi_robustness() {
  const Case c = five_bus_case("five_bus", Flexibility::kMedium, 1.0);
  std::vector<double> costs;
  std::string detail;
  for (double x : {1.0, 1.5, 2.0}) {
    RunConfig cfg = c.config;
    cfg.xi = x;
    costs.push_back(run_bid(c.system, c.scenarios, cfg).total);
    detail += "xi " + fmt("%g", x) + ": " + fmt("%.2f", costs.back()) + "; ";
  }
  for (double x : {0.1, 0.5}) {
    RunConfig cfg = c.config;
    cfg.xi = x;
    try {
      detail += "xi " + fmt("%g", x) + ": " + fmt("%.2f", run_bid(c.system, c.scenarios, cfg).total) +
                " (reported); ";
    } catch (const InfeasibleError&) {
      detail += "xi " + fmt("%g", x) + ": no feasible solution (reported); ";
    }
  }
  const double lo = *std::min_element(costs.begin(), costs.end());
  const double hi = *std::max_element(costs.begin(), costs.end());
  detail += "spread " + fmt("%.4f", 100.0 * (hi - lo) / lo) + "%";
  return {hi - lo < 0.01 * lo, detail};
}

Outcome out_of_sample_spread() {
  const Case c = five_bus_case("five_bus", Flexibility::kMedium, 1.0);
  const BaseProfile base = base_profile_from(c.scenarios);
  SamplerOptions so;
  so.vres_relative_std = 0.6;
  std::vector<ScenarioSet> tests;
  for (std::uint64_t i = 0; i < 50; ++i) {
    tests.push_back(sample_scenarios(c.system, base, c.scenarios.num_scenarios(), 100 + i, so));
  }
  std::string detail = "50 test sets; framework mean std:";
  std::vector<double> stds;
  for (Framework f : {Framework::kMyd, Framework::kBid, Framework::kStd}) {
    const OutOfSample o = out_of_sample(c.system, c.scenarios, f, tests, c.config);
    detail += " " + std::string(to_string(f)) + " " + fmt("%.2f", o.mean) + " " +
              fmt("%.2f", o.stddev) + ";";
    stds.push_back(o.stddev);
  }
  return {stds[1] <= stds[0], detail};
}

Outcome uc_fraction() {
  std::size_t frac = 0, total = 0;
  for (const auto& c : fixture_suite()) {
    if (c.name.rfind("five_bus", 0) != 0) continue;
    for (Framework f : {Framework::kMyd, Framework::kBid, Framework::kStd}) {
      const CostReport r = run_framework(f, c.system, c.scenarios, c.config);
      const UcQualityReport q = uc_quality(r.dam, r.rtm);
      frac += q.da_fractional + q.rt_fractional;
      total += q.da_total + q.rt_total;
    }
  }
  const double share = total ? static_cast<double>(frac) / static_cast<double>(total) : 0.0;
  return {share < 0.05, std::to_string(frac) + " of " + std::to_string(total) +
                            " commitment values fractional (" + fmt("%.3f", 100.0 * share) +
                            "%)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "vresbid_acceptance_determinism";
  std::filesystem::remove_all(root);
  StudySpec spec = load_study(fixture_path("five_bus/study.json"));
  spec.out_of_sample.tests = 5;
  std::vector<std::string> files;
  for (const char* run : {"a", "b"}) {
    spec.output_dir = root / run;
    run_study_and_write(spec);
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / e.path().filename())) {
      ++differing;
      files.push_back(e.path().filename().string());
    }
  }
  std::filesystem::remove_all(root);
  std::string detail = std::to_string(compared) + " CSV files compared, " +
                       std::to_string(differing) + " differ";
  for (const auto& f : files) detail += " " + f;
  return {compared >= 5 && differing == 0, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "sandwich StD <= BiD, MyD", 120, sandwich},
      {2, "oracle agreement", 30, oracle_agreement},
      {3, "relaxation lower bound", 0, relaxation_lower_bound},
      {4, "BiD <= MyD - 5% on curated fixture", 300, bid_beats_myd},
      {5, "strong duality and stationarity", 0, duality_and_stationarity},
      {6, "McCormick envelope validity", 0, envelope_validity},
      {7, "gamma robustness", 0, gamma_robustness},
      {8, "xi robustness", 0, xi_robustness},
      {9, "out-of-sample spread", 0, out_of_sample_spread},
      {10, "UC relaxation quality", 0, uc_fraction},
      {11, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += "; runtime " + fmt("%.1f", secs) + " s exceeds " + fmt("%.0f", c.limit_seconds) + " s";
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %2d: %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
