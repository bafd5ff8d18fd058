#include "vresbid/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "blocks.hpp"
#include "internal.hpp"
#include "parallel.hpp"
#include "vresbid/errors.hpp"

namespace vresbid {

std::string_view to_string(Framework f) {
  switch (f) {
    case Framework::kMyd:
      return "MyD";
    case Framework::kBid:
      return "BiD";
    case Framework::kStd:
      return "StD";
    case Framework::kOracle:
      return "Oracle";
  }
  return "unknown";
}

Framework framework_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "myd") return Framework::kMyd;
  if (lower == "bid") return Framework::kBid;
  if (lower == "std") return Framework::kStd;
  if (lower == "oracle") return Framework::kOracle;
  throw ConfigError("unknown framework '" + std::string(s) +
                    "' (expected myd, bid, std or oracle)");
}

void finalize(CostReport& r, const ScenarioSet& scenarios) {
  r.expected_rt_cost = 0.0;
  for (std::size_t w = 0; w < r.rt_costs.size(); ++w) {
    r.expected_rt_cost += scenarios.weight(w) * r.rt_costs[w];
  }
  r.total = r.dam_cost + r.expected_rt_cost;
  double var = 0.0;
  for (std::size_t w = 0; w < r.rt_costs.size(); ++w) {
    const double d = r.rt_costs[w] - r.expected_rt_cost;
    var += scenarios.weight(w) * d * d;
  }
  r.cost_std = std::sqrt(var);
}

namespace {

CostReport from_evaluation(Framework f, Evaluation e, const BidVector& bids,
                           const ScenarioSet& scenarios) {
  CostReport r;
  r.framework = f;
  r.bids = bids;
  r.dam_cost = e.dam_cost;
  for (const auto& s : e.rtm.scenarios) r.rt_costs.push_back(s.cost);
  r.dam = std::move(e.dam);
  r.rtm = std::move(e.rtm);
  finalize(r, scenarios);
  return r;
}

RunConfig single_threaded(RunConfig c) {
  c.threads = 1;
  return c;
}

}  // namespace

CostReport run_myd(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config) {
  const BidVector bids{scenarios.expected_vres()};
  return from_evaluation(Framework::kMyd, evaluate(system, scenarios, bids, config),
                         bids, scenarios);
}

CostReport run_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config) {
  BidResult b = solve_bid(system, scenarios, config);
  CostReport r = from_evaluation(Framework::kBid, std::move(b.evaluation), b.bids,
                                 scenarios);
  r.relaxed_objective = b.relaxed_objective;
  return r;
}

CostReport run_std(const PowerSystem& system, const ScenarioSet& scenarios,
                   const RunConfig& config) {
  config.validate(system);
  const std::size_t T = scenarios.num_periods();
  const auto& periods = scenarios.periods();
  Grid capacity = make_grid(system.num_vres(), T);
  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    std::fill(capacity[k].begin(), capacity[k].end(), system.vres()[k].capacity);
  }
  LpModel m;
  detail::WindBound wind;
  wind.constant = &capacity;
  const detail::DamBlock dam = detail::add_dam_block(
      m, system, periods, scenarios.da_bus_demand(system), wind, "da.");
  const detail::DaSchedule schedule = detail::schedule_from_block(dam);
  std::vector<detail::RtmBlock> blocks;
  for (std::size_t w = 0; w < scenarios.num_scenarios(); ++w) {
    blocks.push_back(detail::add_rtm_block(
        m, system, periods, scenarios.scenario(w).vres_output,
        scenarios.bus_demand(system, w), schedule, config.voll, scenarios.weight(w),
        "rt." + scenarios.scenario(w).id + "."));
  }
  const LpSolution lp = solve(m, detail::solve_options(config));
  if (lp.status == LpStatus::kInfeasible) {
    throw InfeasibleError("stochastic dispatch is infeasible");
  }
  if (!lp.optimal()) throw SolverError("stochastic dispatch LP is unbounded");

  CostReport r;
  r.framework = Framework::kStd;
  r.dam.periods = periods;
  r.dam.bids = BidVector{capacity};
  detail::fill_dam_primal(r.dam, dam, lp.primal);
  r.dam.duals.balance = detail::duals(dam.balance, lp.dual);
  r.dam_cost = r.dam.cost;
  for (std::size_t w = 0; w < blocks.size(); ++w) {
    r.rtm.scenarios.push_back(detail::extract_rtm(blocks[w], lp, scenarios.weight(w), w,
                                                  scenarios.scenario(w).id));
    r.rt_costs.push_back(r.rtm.scenarios.back().cost);
  }
  finalize(r, scenarios);
  r.rtm.expected_cost = r.expected_rt_cost;
  return r;
}

CostReport run_oracle(const PowerSystem& system, const ScenarioSet& scenarios,
                      const OracleOptions& options, const RunConfig& config) {
  if (!(options.step > 0.0)) throw ConfigError("oracle step must be > 0");
  const std::size_t K = system.num_vres(), T = scenarios.num_periods();
  Grid upper = options.upper;
  if (upper.empty()) {
    upper = make_grid(K, T);
    for (std::size_t k = 0; k < K; ++k) {
      std::fill(upper[k].begin(), upper[k].end(), system.vres()[k].capacity);
    }
  }
  std::vector<std::vector<double>> axes;
  double points = 1.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      const double top = std::max(0.0, upper[k][t]);
      std::vector<double> axis;
      const auto n = static_cast<std::size_t>(std::floor(top / options.step + 1e-9));
      for (std::size_t j = 0; j <= n; ++j) axis.push_back(std::min(top, j * options.step));
      if (axis.back() < top - 1e-9) axis.push_back(top);
      points *= static_cast<double>(axis.size());
      axes.push_back(std::move(axis));
    }
  }
  if (points > static_cast<double>(options.max_points)) {
    throw ConfigError("oracle grid has " + std::to_string(static_cast<long long>(points)) +
                      " points, above the cap of " + std::to_string(options.max_points));
  }
  const auto total = static_cast<std::size_t>(points);
  auto bids_at = [&](std::size_t index) {
    BidVector b{make_grid(K, T)};
    for (std::size_t d = axes.size(); d-- > 0;) {
      const std::size_t n = axes[d].size();
      b.quantity[d / T][d % T] = axes[d][index % n];
      index /= n;
    }
    return b;
  };

  const RunConfig inner = single_threaded(config);
  std::vector<double> cost(total, std::numeric_limits<double>::infinity());
  detail::parallel_for(total, config.threads, [&](std::size_t i) {
    try {
      cost[i] = evaluate_bids(system, scenarios, bids_at(i), inner);
    } catch (const InfeasibleError&) {
    }
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i) {
    if (cost[i] < cost[best]) best = i;
  }
  if (!std::isfinite(cost[best])) {
    throw InfeasibleError("day-ahead market is infeasible at every oracle grid point");
  }
  const BidVector bids = bids_at(best);
  return from_evaluation(Framework::kOracle, evaluate(system, scenarios, bids, config),
                         bids, scenarios);
}

CostReport run_framework(Framework f, const PowerSystem& system,
                         const ScenarioSet& scenarios, const RunConfig& config,
                         const OracleOptions& oracle) {
  switch (f) {
    case Framework::kMyd:
      return run_myd(system, scenarios, config);
    case Framework::kBid:
      return run_bid(system, scenarios, config);
    case Framework::kStd:
      return run_std(system, scenarios, config);
    case Framework::kOracle:
      return run_oracle(system, scenarios, oracle, config);
  }
  throw ConfigError("unknown framework");
}

// ---------------------------------------------------------------------------

namespace {

OutOfSample summarize(Framework f, std::vector<double> costs) {
  OutOfSample o;
  o.framework = f;
  o.costs = std::move(costs);
  if (o.costs.empty()) return o;
  double sum = 0.0;
  for (double c : o.costs) sum += c;
  o.mean = sum / static_cast<double>(o.costs.size());
  double var = 0.0;
  for (double c : o.costs) var += (c - o.mean) * (c - o.mean);
  o.stddev = std::sqrt(var / static_cast<double>(o.costs.size()));
  return o;
}

}  // namespace

OutOfSample out_of_sample(const PowerSystem& system, const CostReport& trained,
                          const std::vector<ScenarioSet>& tests,
                          const RunConfig& config) {
  for (const auto& t : tests) {
    if (t.periods() != trained.dam.periods) {
      throw ValidationError("out-of-sample test set periods differ from training");
    }
  }
  std::vector<double> costs(tests.size());
  const RunConfig inner = single_threaded(config);
  detail::parallel_for(tests.size(), config.threads, [&](std::size_t i) {
    costs[i] = trained.dam_cost + expected_rt_cost(system, tests[i], trained.dam, inner);
  });
  return summarize(trained.framework, std::move(costs));
}

OutOfSample out_of_sample(const PowerSystem& system, const ScenarioSet& train,
                          Framework framework, const std::vector<ScenarioSet>& tests,
                          const RunConfig& config, const OracleOptions& oracle) {
  return out_of_sample(system, run_framework(framework, system, train, config, oracle),
                       tests, config);
}

// ---------------------------------------------------------------------------

namespace {

void append_columns(Grid& into, const Grid& from) {
  if (into.empty()) {
    into = from;
    return;
  }
  for (std::size_t e = 0; e < into.size(); ++e) {
    into[e].insert(into[e].end(), from[e].begin(), from[e].end());
  }
}

void append_rtm(RtmSolution& into, const RtmSolution& from) {
  into.scenario = from.scenario;
  into.scenario_id = from.scenario_id;
  append_columns(into.r_up, from.r_up);
  append_columns(into.r_down, from.r_down);
  append_columns(into.u, from.u);
  append_columns(into.c, from.c);
  append_columns(into.curtail, from.curtail);
  append_columns(into.shed, from.shed);
  append_columns(into.delta, from.delta);
  append_columns(into.price, from.price);
  into.cost += from.cost;
}

}  // namespace

RollingResult rolling_horizon(const PowerSystem& system, const ScenarioSet& scenarios,
                              std::size_t window, Framework framework,
                              const RunConfig& config, const OracleOptions& oracle) {
  const std::size_t T = scenarios.num_periods();
  if (window == 0) window = T;
  if (T % window != 0) {
    throw ValidationError("horizon of " + std::to_string(T) +
                          " periods is not divisible by window " +
                          std::to_string(window));
  }
  RollingResult out;
  CostReport& st = out.stitched;
  st.framework = framework;
  st.rt_costs.assign(scenarios.num_scenarios(), 0.0);
  st.rtm.scenarios.resize(scenarios.num_scenarios());
  BidVector bids;
  bool has_bids = true;

  SystemData data = system.data();
  for (std::size_t first = 0; first < T; first += window) {
    const PowerSystem sys(data);
    const ScenarioSet part = scenarios.slice(sys, first, window);
    WindowRecord rec;
    rec.first_period = first;
    for (const auto& u : data.conventional_units) {
      rec.initial_commitment.push_back(u.initial_commitment);
      rec.initial_output.push_back(u.initial_output);
    }
    rec.report = run_framework(framework, sys, part, config, oracle);
    const auto& r = rec.report;
    for (std::size_t i = 0; i < data.conventional_units.size(); ++i) {
      auto& unit = data.conventional_units[i];
      const double u = std::clamp(r.dam.u[i].back(), 0.0, 1.0);
      const double p = std::clamp(r.dam.p[i].back(), u * unit.p_min, u * unit.p_max);
      unit.initial_commitment = u;
      unit.initial_output = p;
      rec.terminal_commitment.push_back(u);
      rec.terminal_output.push_back(p);
    }

    st.dam_cost += r.dam_cost;
    for (std::size_t w = 0; w < r.rt_costs.size(); ++w) {
      st.rt_costs[w] += r.rt_costs[w];
      append_rtm(st.rtm.scenarios[w], r.rtm.scenarios[w]);
    }
    st.dam.periods.insert(st.dam.periods.end(), r.dam.periods.begin(),
                          r.dam.periods.end());
    append_columns(st.dam.p, r.dam.p);
    append_columns(st.dam.u, r.dam.u);
    append_columns(st.dam.c, r.dam.c);
    append_columns(st.dam.pw, r.dam.pw);
    append_columns(st.dam.delta, r.dam.delta);
    append_columns(st.dam.duals.balance, r.dam.duals.balance);
    append_columns(st.dam.bids.quantity, r.dam.bids.quantity);
    if (r.bids) {
      append_columns(bids.quantity, r.bids->quantity);
    } else {
      has_bids = false;
    }
    if (r.relaxed_objective) {
      st.relaxed_objective = st.relaxed_objective.value_or(0.0) + *r.relaxed_objective;
    }
    out.windows.push_back(std::move(rec));
  }
  st.dam.cost = st.dam_cost;
  if (has_bids) st.bids = bids;
  finalize(st, scenarios);
  st.rtm.expected_cost = st.expected_rt_cost;
  return out;
}

}  // namespace vresbid
