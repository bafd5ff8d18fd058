#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include "vresbid/bench.hpp"
#include "vresbid/bid.hpp"
#include "vresbid/dam.hpp"
#include "vresbid/rtm.hpp"
#include "vresbid/system.hpp"

namespace {

using namespace vresbid;

struct Fixture {
  PowerSystem system;
  ScenarioSet scenarios;
};

const Fixture& fixture(const std::string& name) {
  static const Fixture two{load_system(std::filesystem::path(VRESBID_FIXTURE_DIR) / "two_bus/system.json"),
                           load_scenarios(std::filesystem::path(VRESBID_FIXTURE_DIR) / "two_bus/scenarios.csv",
                                          load_system(std::filesystem::path(VRESBID_FIXTURE_DIR) / "two_bus/system.json"))};
  static const Fixture five{load_system(std::filesystem::path(VRESBID_FIXTURE_DIR) / "five_bus/system.json"),
                            load_scenarios(std::filesystem::path(VRESBID_FIXTURE_DIR) / "five_bus/scenarios.csv",
                                           load_system(std::filesystem::path(VRESBID_FIXTURE_DIR) / "five_bus/system.json"))};
  return name == "two_bus" ? two : five;
}

RunConfig serial() {
  RunConfig c;
  c.threads = 1;
  return c;
}

void BM_DamMeanBids(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  const BidVector bids{f.scenarios.expected_vres()};
  for (auto _ : state) benchmark::DoNotOptimize(solve_dam(f.system, f.scenarios, bids).cost);
}
BENCHMARK(BM_DamMeanBids);

void BM_RtmAllScenarios(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  const DamSolution da = solve_dam(f.system, f.scenarios, BidVector{f.scenarios.expected_vres()});
  RunConfig c;
  c.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(expected_rt_cost(f.system, f.scenarios, da, c));
}
BENCHMARK(BM_RtmAllScenarios)->Arg(1)->Arg(4);

void BM_Myd(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  for (auto _ : state) benchmark::DoNotOptimize(run_myd(f.system, f.scenarios, serial()).total);
}
BENCHMARK(BM_Myd);

void BM_Bid(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  for (auto _ : state) benchmark::DoNotOptimize(run_bid(f.system, f.scenarios, serial()).total);
}
BENCHMARK(BM_Bid);

void BM_Std(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  for (auto _ : state) benchmark::DoNotOptimize(run_std(f.system, f.scenarios, serial()).total);
}
BENCHMARK(BM_Std);

void BM_OracleTwoBus(benchmark::State& state) {
  const Fixture& f = fixture("two_bus");
  OracleOptions o;
  o.step = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_oracle(f.system, f.scenarios, o, serial()).total);
}
BENCHMARK(BM_OracleTwoBus);

void BM_BuildBidModel(benchmark::State& state) {
  const Fixture& f = fixture("five_bus");
  const McCormickBounds b = make_bounds(f.system, f.scenarios, serial());
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_bid_mccormick(f.system, f.scenarios, b).num_variables());
  }
}
BENCHMARK(BM_BuildBidModel);

}  // namespace

BENCHMARK_MAIN();
