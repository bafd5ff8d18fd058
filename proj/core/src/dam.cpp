#include "vresbid/dam.hpp"

#include <algorithm>
#include <cmath>

#include "blocks.hpp"
#include "internal.hpp"
#include "vresbid/errors.hpp"

namespace vresbid {

namespace detail {

void fill_dam_primal(DamSolution& s, const DamBlock& b, const std::vector<double>& x) {
  s.p = values(b.p, x);
  s.u = values(b.u, x);
  s.c = values(b.c, x);
  s.pw = values(b.pw, x);
  s.delta = values(b.delta, x);
  s.cost = 0.0;
  for (const auto& t : b.cost_terms) s.cost += t.coef * x[t.var];
}

DamModel build_dam_model(const PowerSystem& system, const ScenarioSet& scenarios,
                         const BidVector& bids) {
  bids.validate(system, scenarios.num_periods());
  DamModel out;
  WindBound wind;
  wind.constant = &bids.quantity;
  out.block = add_dam_block(out.model, system, scenarios.periods(),
                            scenarios.da_bus_demand(system), wind, "");
  return out;
}

}  // namespace detail

LpModel build_dam(const PowerSystem& system, const ScenarioSet& scenarios,
                  const BidVector& bids) {
  return detail::build_dam_model(system, scenarios, bids).model;
}

DamSolution solve_dam(const PowerSystem& system, const ScenarioSet& scenarios,
                      const BidVector& bids, const SolveOptions& options) {
  detail::DamModel built = detail::build_dam_model(system, scenarios, bids);
  LpSolution lp = solve(built.model, options);
  if (lp.status == LpStatus::kInfeasible) {
    throw InfeasibleError(
        "day-ahead market is infeasible: demand cannot be served within line "
        "and unit limits");
  }
  if (lp.status == LpStatus::kUnbounded) {
    throw SolverError("day-ahead market LP is unbounded");
  }
  const auto& b = built.block;
  DamSolution s;
  s.periods = scenarios.periods();
  s.bids = bids;
  detail::fill_dam_primal(s, b, lp.primal);
  const auto& y = lp.dual;
  s.duals.balance = detail::duals(b.balance, y);
  s.duals.line_lo = detail::duals(b.line_lo, y);
  s.duals.line_up = detail::duals(b.line_up, y);
  s.duals.vres_lo = detail::duals(b.w_lo, y);
  s.duals.vres_up = detail::duals(b.w_up, y);
  s.duals.cap_lo = detail::duals(b.cap_lo, y);
  s.duals.cap_up = detail::duals(b.cap_up, y);
  s.duals.commit_lo = detail::duals(b.u_lo, y);
  s.duals.commit_up = detail::duals(b.u_up, y);
  s.duals.startup = detail::duals(b.s1, y);
  s.duals.startup_lo = detail::duals(b.s2, y);
  s.duals.ramp_down = detail::duals(b.ramp_dn, y);
  s.duals.ramp_up = detail::duals(b.ramp_up, y);
  s.model = std::make_shared<const LpModel>(std::move(built.model));
  s.lp = std::move(lp);
  return s;
}

Grid lmp(const DamSolution& solution) { return solution.duals.balance; }

double StationarityResiduals::max() const {
  return std::max({generation, startup, commitment, vres, angle});
}

StationarityResiduals dam_stationarity(const PowerSystem& system,
                                       const DamSolution& s) {
  const auto& d = s.duals;
  const std::size_t T = s.periods.size();
  StationarityResiduals r;
  for (std::size_t i = 0; i < system.num_units(); ++i) {
    const auto& g = system.units()[i];
    for (std::size_t t = 0; t < T; ++t) {
      const bool last = t + 1 == T;
      const std::size_t n = system.unit_bus(i);
      double a = g.variable_cost - d.balance[n][t] - d.cap_lo[i][t] +
                 d.cap_up[i][t] + d.ramp_up[i][t] - d.ramp_down[i][t];
      if (!last) a += -d.ramp_up[i][t + 1] + d.ramp_down[i][t + 1];
      r.generation = std::max(r.generation, std::abs(a));

      const double b = 1.0 - d.startup[i][t] - d.startup_lo[i][t];
      r.startup = std::max(r.startup, std::abs(b));

      double c = g.no_load_cost + g.p_min * d.cap_lo[i][t] -
                 g.p_max * d.cap_up[i][t] - d.commit_lo[i][t] + d.commit_up[i][t] -
                 g.ramp_up * d.ramp_up[i][t] + g.startup_cost * d.startup[i][t];
      if (!last) {
        c += -g.ramp_down * d.ramp_down[i][t + 1] -
             g.startup_cost * d.startup[i][t + 1];
      }
      r.commitment = std::max(r.commitment, std::abs(c));
    }
  }
  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    const std::size_t n = system.vres_bus(k);
    for (std::size_t t = 0; t < T; ++t) {
      const double v = -d.balance[n][t] - d.vres_lo[k][t] + d.vres_up[k][t];
      r.vres = std::max(r.vres, std::abs(v));
    }
  }
  const std::size_t ref = system.reference_bus();
  for (std::size_t n = 0; n < system.num_buses(); ++n) {
    if (n == ref) continue;
    for (std::size_t t = 0; t < T; ++t) {
      double e = 0.0;
      for (std::size_t l = 0; l < system.num_lines(); ++l) {
        const double x = system.lines()[l].reactance;
        if (system.line_from(l) == n) {
          const std::size_t m = system.line_to(l);
          e += (d.balance[n][t] - d.balance[m][t] - d.line_lo[l][t] +
                d.line_up[l][t]) / x;
        } else if (system.line_to(l) == n) {
          const std::size_t m = system.line_from(l);
          e += (d.balance[n][t] - d.balance[m][t] + d.line_lo[l][t] -
                d.line_up[l][t]) / x;
        }
      }
      r.angle = std::max(r.angle, std::abs(e));
    }
  }
  return r;
}

double dam_dual_objective(const PowerSystem& system, const ScenarioSet& scenarios,
                          const DamSolution& s) {
  const auto& d = s.duals;
  const Grid load = scenarios.da_bus_demand(system);
  const std::size_t T = s.periods.size();
  double g = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < system.num_buses(); ++n) g += d.balance[n][t] * load[n][t];
    for (std::size_t l = 0; l < system.num_lines(); ++l) {
      g -= system.lines()[l].capacity * (d.line_lo[l][t] + d.line_up[l][t]);
    }
    for (std::size_t i = 0; i < system.num_units(); ++i) g -= d.commit_up[i][t];
    for (std::size_t k = 0; k < system.num_vres(); ++k) {
      g -= d.vres_up[k][t] * s.bids.quantity[k][t];
    }
  }
  for (std::size_t i = 0; i < system.num_units(); ++i) {
    const auto& u = system.units()[i];
    g += (u.initial_output - u.initial_commitment * u.ramp_down) * d.ramp_down[i][0];
    g -= u.initial_output * d.ramp_up[i][0];
    g -= u.startup_cost * u.initial_commitment * d.startup[i][0];
  }
  return g;
}

double dam_duality_gap(const PowerSystem& system, const ScenarioSet& scenarios,
                       const DamSolution& solution) {
  return std::abs(solution.cost - dam_dual_objective(system, scenarios, solution));
}

double dam_balance_residual(const PowerSystem& system, const ScenarioSet& scenarios,
                            const DamSolution& s) {
  const Grid load = scenarios.da_bus_demand(system);
  double worst = 0.0;
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    std::vector<double> net(system.num_buses(), 0.0);
    for (std::size_t i = 0; i < system.num_units(); ++i) net[system.unit_bus(i)] += s.p[i][t];
    for (std::size_t k = 0; k < system.num_vres(); ++k) net[system.vres_bus(k)] += s.pw[k][t];
    for (std::size_t l = 0; l < system.num_lines(); ++l) {
      const std::size_t a = system.line_from(l), z = system.line_to(l);
      const double f = (s.delta[a][t] - s.delta[z][t]) / system.lines()[l].reactance;
      net[a] -= f;
      net[z] += f;
    }
    for (std::size_t n = 0; n < system.num_buses(); ++n) {
      worst = std::max(worst, std::abs(net[n] - load[n][t]));
    }
  }
  return worst;
}

}  // namespace vresbid
