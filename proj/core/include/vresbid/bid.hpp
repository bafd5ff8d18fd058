#pragma once

#include <array>

#include "vresbid/dam.hpp"
#include "vresbid/lp.hpp"
#include "vresbid/rtm.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

// Box on bid quantity W and VRES-bound dual per (vres, period).
struct McCormickBounds {
  Grid w_lo, w_hi;            // MW
  Grid lambda_lo, lambda_hi;  // $/MWh

  // Throws ValidationError on shape mismatch, negative, non-finite or
  // crossed bounds.
  void validate(const PowerSystem& system, std::size_t periods) const;
};

// gamma times the expected VRES output.
Grid quantity_bounds(const ScenarioSet& scenarios, double gamma);

// xi times the VRES-bound dual of the zero-bid DAM, with the bus price as a
// floor when that dual is degenerate. Throws InfeasibleError if the zero-bid
// DAM is infeasible.
Grid dual_bounds(const PowerSystem& system, const ScenarioSet& scenarios,
                 double xi, const SolveOptions& options = {});

// Lower bounds 0; quantity upper bound capped at installed capacity.
McCormickBounds make_bounds(const PowerSystem& system, const ScenarioSet& scenarios,
                            const RunConfig& config);

// Slacks of the four envelope inequalities at (w, lambda, z); all are >= 0
// exactly when the point satisfies the envelope.
std::array<double, 4> mccormick_slacks(double w, double lambda, double z,
                                       double w_lo, double w_hi, double lambda_lo,
                                       double lambda_hi);

// Single-level relaxation: day-ahead primal block with bid variables, its
// dual block, strong duality with the bilinear terms replaced by z,
// envelope rows, and every scenario's re-dispatch block.
LpModel build_bid_mccormick(const PowerSystem& system, const ScenarioSet& scenarios,
                            const McCormickBounds& bounds,
                            const RunConfig& config = {});

// Sequential DAM then RTM cost of a bid vector.
struct Evaluation {
  double cost = 0.0;
  double dam_cost = 0.0;
  double expected_rt_cost = 0.0;
  DamSolution dam;
  RtmResults rtm;
};

Evaluation evaluate(const PowerSystem& system, const ScenarioSet& scenarios,
                    const BidVector& bids, const RunConfig& config = {});

double evaluate_bids(const PowerSystem& system, const ScenarioSet& scenarios,
                     const BidVector& bids, const RunConfig& config = {});

struct BidResult {
  BidVector bids;
  McCormickBounds bounds;
  double relaxed_objective = 0.0;  // diagnostic only
  Grid envelope_gap;               // |z - lambda * W| per (vres, period)
  Evaluation evaluation;           // cost by re-simulation
};

// Throws InfeasibleError naming gamma and xi when the relaxation is empty.
BidResult solve_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                    const RunConfig& config = {});
BidResult solve_bid(const PowerSystem& system, const ScenarioSet& scenarios,
                    const McCormickBounds& bounds, const RunConfig& config = {});

}  // namespace vresbid
