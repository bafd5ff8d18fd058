#pragma once

#include <vector>

#include "blocks.hpp"
#include "vresbid/dam.hpp"
#include "vresbid/rtm.hpp"

namespace vresbid::detail {

struct DamModel {
  LpModel model;
  DamBlock block;
};

DamModel build_dam_model(const PowerSystem& system, const ScenarioSet& scenarios,
                         const BidVector& bids);

// Copies the primal part of a DAM block out of a solved model. Duals stay empty.
void fill_dam_primal(DamSolution& s, const DamBlock& b, const std::vector<double>& x);

// Reads one scenario's recourse out of a solved model.
RtmSolution extract_rtm(const RtmBlock& b, const LpSolution& lp, double weight,
                        std::size_t scenario, const std::string& id);

SolveOptions solve_options(const RunConfig& config);

}  // namespace vresbid::detail
