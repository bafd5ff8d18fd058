#pragma once

#include <memory>
#include <vector>

#include "vresbid/lp.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

// Nonnegative inequality multipliers and free balance multipliers of the
// day-ahead clearing. Unit and VRES tables are [element][period], line
// tables [line][period], balance [bus][period].
struct DamDuals {
  Grid balance;
  Grid line_lo, line_up;
  Grid vres_lo, vres_up;
  Grid cap_lo, cap_up;
  Grid commit_lo, commit_up;
  Grid startup, startup_lo;
  Grid ramp_down, ramp_up;
};

struct DamSolution {
  std::vector<int> periods;
  BidVector bids;
  Grid p, u, c;   // [unit][period]
  Grid pw;        // [vres][period]
  Grid delta;     // [bus][period]
  double cost = 0.0;
  DamDuals duals;
  std::shared_ptr<const LpModel> model;
  LpSolution lp;
};

// Day-ahead clearing LP for fixed bids. Row order per period: bus balance,
// line lower/upper, VRES lower/upper, then per unit capacity lower/upper,
// commitment lower/upper, startup, startup lower, ramp down/up.
LpModel build_dam(const PowerSystem& system, const ScenarioSet& scenarios,
                  const BidVector& bids);

// Throws InfeasibleError when demand cannot be served.
DamSolution solve_dam(const PowerSystem& system, const ScenarioSet& scenarios,
                      const BidVector& bids, const SolveOptions& options = {});

// Balance duals [bus][period] in $/MWh.
Grid lmp(const DamSolution& solution);

// Largest stationarity residual per variable family (generation, VRES,
// commitment, startup cost, bus angle). The final period drops the t+1
// ramp and startup multipliers.
struct StationarityResiduals {
  double generation = 0.0;
  double startup = 0.0;
  double commitment = 0.0;
  double vres = 0.0;
  double angle = 0.0;

  double max() const;
};

StationarityResiduals dam_stationarity(const PowerSystem& system,
                                       const DamSolution& solution);

// Dual objective including the initial-state terms of the first period.
double dam_dual_objective(const PowerSystem& system, const ScenarioSet& scenarios,
                          const DamSolution& solution);

// |f_DA - dual objective|.
double dam_duality_gap(const PowerSystem& system, const ScenarioSet& scenarios,
                       const DamSolution& solution);

// Largest |balance residual| in MW over buses and periods.
double dam_balance_residual(const PowerSystem& system, const ScenarioSet& scenarios,
                            const DamSolution& solution);

}  // namespace vresbid
