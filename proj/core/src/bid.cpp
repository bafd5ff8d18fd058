#include "vresbid/bid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "blocks.hpp"
#include "internal.hpp"
#include "vresbid/errors.hpp"

namespace vresbid {

void McCormickBounds::validate(const PowerSystem& system, std::size_t periods) const {
  for (const Grid* g : {&w_lo, &w_hi, &lambda_lo, &lambda_hi}) {
    if (g->size() != system.num_vres()) {
      throw ValidationError("McCormick bounds do not cover every VRES unit");
    }
    for (const auto& row : *g) {
      if (row.size() != periods) {
        throw ValidationError("McCormick bounds do not cover every period");
      }
      for (double v : row) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("McCormick bounds must be finite and >= 0");
        }
      }
    }
  }
  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    for (std::size_t t = 0; t < periods; ++t) {
      if (w_lo[k][t] > w_hi[k][t] || lambda_lo[k][t] > lambda_hi[k][t]) {
        throw ValidationError("McCormick lower bound exceeds upper bound for '" +
                              system.vres()[k].id + "'");
      }
    }
  }
}

Grid quantity_bounds(const ScenarioSet& scenarios, double gamma) {
  if (!(gamma >= 0.0)) throw ValidationError("gamma must be >= 0");
  Grid g = scenarios.expected_vres();
  for (auto& row : g) {
    for (double& v : row) v *= gamma;
  }
  return g;
}

Grid dual_bounds(const PowerSystem& system, const ScenarioSet& scenarios, double xi,
                 const SolveOptions& options) {
  if (!(xi >= 0.0)) throw ValidationError("xi must be >= 0");
  const DamSolution zero = solve_dam(
      system, scenarios, BidVector::zeros(system, scenarios.num_periods()), options);
  Grid g = make_grid(system.num_vres(), scenarios.num_periods());
  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    const std::size_t n = system.vres_bus(k);
    for (std::size_t t = 0; t < scenarios.num_periods(); ++t) {
      const double dual = std::max(zero.duals.vres_up[k][t], zero.duals.balance[n][t]);
      g[k][t] = xi * std::max(0.0, dual);
    }
  }
  return g;
}

McCormickBounds make_bounds(const PowerSystem& system, const ScenarioSet& scenarios,
                            const RunConfig& config) {
  McCormickBounds b;
  const std::size_t K = system.num_vres(), T = scenarios.num_periods();
  b.w_lo = make_grid(K, T);
  b.lambda_lo = make_grid(K, T);
  b.w_hi = quantity_bounds(scenarios, config.gamma);
  for (std::size_t k = 0; k < K; ++k) {
    for (double& v : b.w_hi[k]) v = std::min(v, system.vres()[k].capacity);
  }
  b.lambda_hi = dual_bounds(system, scenarios, config.xi,
                            detail::solve_options(config));
  return b;
}

std::array<double, 4> mccormick_slacks(double w, double lam, double z, double wl,
                                       double wu, double ll, double lu) {
  return {
      z - (ll * w + lam * wl - ll * wl),
      z - (lu * w + lam * wu - lu * wu),
      (lu * w + lam * wl - lu * wl) - z,
      (ll * w + lam * wu - ll * wu) - z,
  };
}

namespace {

struct BidModel {
  LpModel model;
  detail::Index w, z, lambda_w;
  detail::DamBlock dam;
  std::vector<detail::RtmBlock> rtm;
};

BidModel build(const PowerSystem& system, const ScenarioSet& scenarios,
               const McCormickBounds& bounds, const RunConfig& config) {
  const std::size_t K = system.num_vres(), T = scenarios.num_periods();
  bounds.validate(system, T);
  const auto& periods = scenarios.periods();
  BidModel bm;
  LpModel& m = bm.model;

  bm.w = detail::make_index(K, T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      bm.w[k][t] = m.add_variable(detail::label("", "W", system.vres()[k].id, periods[t]),
                                  bounds.w_lo[k][t], bounds.w_hi[k][t]);
    }
  }
  detail::WindBound wind;
  wind.variable = &bm.w;
  bm.dam = detail::add_dam_block(m, system, periods, scenarios.da_bus_demand(system),
                                 wind, "da.");

  // Dual block of the same clearing with the bids moved out of the rows.
  const detail::DamModel source =
      detail::build_dam_model(system, scenarios, BidVector::zeros(system, T));
  const detail::DualBlock dual = detail::add_dual_block(m, source.model, "dual.");
  bm.lambda_w = detail::make_index(K, T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      bm.lambda_w[k][t] = dual.lambda[source.block.w_up[k][t]];
      m.set_bounds(bm.lambda_w[k][t], bounds.lambda_lo[k][t], bounds.lambda_hi[k][t]);
    }
  }

  bm.z = detail::make_index(K, T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      bm.z[k][t] = m.add_variable(detail::label("", "z", system.vres()[k].id, periods[t]),
                                  -kInf, kInf);
    }
  }

  // f_DA(x) - g(lambda, z) = 0 with g = sum_r s_r b_r lambda_r - sum z.
  std::vector<LpTerm> sd = bm.dam.cost_terms;
  for (std::size_t r = 0; r < source.model.num_constraints(); ++r) {
    const auto& row = source.model.constraint(r);
    if (row.rhs != 0.0) sd.push_back({dual.lambda[r], -dual_sign(row.relation) * row.rhs});
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) sd.push_back({bm.z[k][t], 1.0});
  }
  m.add_constraint("strong_duality", std::move(sd), Relation::kEqual, 0.0);

  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      const double wl = bounds.w_lo[k][t], wu = bounds.w_hi[k][t];
      const double ll = bounds.lambda_lo[k][t], lu = bounds.lambda_hi[k][t];
      const auto w = bm.w[k][t], lam = bm.lambda_w[k][t], z = bm.z[k][t];
      const std::string& id = system.vres()[k].id;
      const int per = periods[t];
      m.add_constraint(detail::label("", "mc_a", id, per),
                       {{z, 1.0}, {w, -ll}, {lam, -wl}}, Relation::kGreaterEqual,
                       -ll * wl);
      m.add_constraint(detail::label("", "mc_b", id, per),
                       {{z, 1.0}, {w, -lu}, {lam, -wu}}, Relation::kGreaterEqual,
                       -lu * wu);
      m.add_constraint(detail::label("", "mc_c", id, per),
                       {{z, 1.0}, {w, -lu}, {lam, -wl}}, Relation::kLessEqual,
                       -lu * wl);
      m.add_constraint(detail::label("", "mc_d", id, per),
                       {{z, 1.0}, {w, -ll}, {lam, -wu}}, Relation::kLessEqual,
                       -ll * wu);
    }
  }

  const detail::DaSchedule schedule = detail::schedule_from_block(bm.dam);
  for (std::size_t s = 0; s < scenarios.num_scenarios(); ++s) {
    bm.rtm.push_back(detail::add_rtm_block(
        m, system, periods, scenarios.scenario(s).vres_output,
        scenarios.bus_demand(system, s), schedule, config.voll, scenarios.weight(s),
        "rt." + scenarios.scenario(s).id + "."));
  }
  return bm;
}

std::string bound_settings(const RunConfig& c) {
  std::ostringstream ss;
  ss << "gamma=" << c.gamma << ", xi=" << c.xi;
  return ss.str();
}

}  // namespace

LpModel build_bid_mccormick(const PowerSystem& system, const ScenarioSet& scenarios,
                            const McCormickBounds& bounds, const RunConfig& config) {
  return build(system, scenarios, bounds, config).model;
}

Evaluation evaluate(const PowerSystem& system, const ScenarioSet& scenarios,
                    const BidVector& bids, const RunConfig& config) {
  Evaluation e;
  e.dam = solve_dam(system, scenarios, bids, detail::solve_options(config));
  e.rtm = solve_rtm_all(system, scenarios, e.dam, config);
  e.dam_cost = e.dam.cost;
  e.expected_rt_cost = e.rtm.expected_cost;
  e.cost = e.dam_cost + e.expected_rt_cost;
  return e;
}

double evaluate_bids(const PowerSystem& system, const ScenarioSet& scenarios,
                     const BidVector& bids, const RunConfig& config) {
  return evaluate(system, scenarios, bids, config).cost;
}

BidResult solve_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                    const RunConfig& config) {
  return solve_bid(system, scenarios, make_bounds(system, scenarios, config), config);
}

BidResult solve_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                    const McCormickBounds& bounds, const RunConfig& config) {
  config.validate(system);
  BidModel bm = build(system, scenarios, bounds, config);
  const LpSolution lp = solve(bm.model, detail::solve_options(config));
  if (lp.status == LpStatus::kInfeasible) {
    throw InfeasibleError("no feasible solution of the relaxed bidding problem (" +
                          bound_settings(config) + ")");
  }
  if (lp.status != LpStatus::kOptimal) {
    throw SolverError("relaxed bidding problem is " +
                      std::string(to_string(lp.status)) + " (" +
                      bound_settings(config) + ")");
  }
  BidResult r;
  r.bounds = bounds;
  r.relaxed_objective = lp.objective;
  const std::size_t K = system.num_vres(), T = scenarios.num_periods();
  r.bids.quantity = make_grid(K, T);
  r.envelope_gap = make_grid(K, T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      const double w = lp.primal[bm.w[k][t]];
      r.bids.quantity[k][t] = std::clamp(w, bounds.w_lo[k][t], bounds.w_hi[k][t]);
      r.envelope_gap[k][t] =
          std::abs(lp.primal[bm.z[k][t]] - lp.primal[bm.lambda_w[k][t]] * w);
    }
  }
  try {
    r.evaluation = evaluate(system, scenarios, r.bids, config);
  } catch (const InfeasibleError& e) {
    throw SolverError(std::string("day-ahead re-simulation of the optimized bids "
                                  "failed: ") + e.what());
  }
  return r;
}

}  // namespace vresbid
