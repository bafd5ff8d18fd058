#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vresbid/lp.hpp"
#include "vresbid/system.hpp"

namespace vresbid::detail {

using Index = std::vector<std::vector<std::size_t>>;  // [element][period]

Index make_index(std::size_t rows, std::size_t cols);

// a'x + constant, used for day-ahead quantities that are data in the RTM and
// decision variables in the joint models.
struct Affine {
  std::vector<LpTerm> terms;
  double constant = 0.0;

  static Affine of(double v) { return {{}, v}; }
  static Affine var(std::size_t j) { return {{{j, 1.0}}, 0.0}; }
  bool is_constant() const { return terms.empty(); }
};

// Upper bound of the day-ahead VRES rows: fixed bids or bid variables.
struct WindBound {
  const Grid* constant = nullptr;
  const Index* variable = nullptr;
};

// Day-ahead clearing block. All variables are free except the reference
// angle; every bound is an explicit row so each carries a dual.
struct DamBlock {
  Index p, u, c, pw, delta;
  Index balance, line_lo, line_up, w_lo, w_up;
  Index cap_lo, cap_up, u_lo, u_up, s1, s2, ramp_dn, ramp_up;
  std::vector<LpTerm> cost_terms;
};

DamBlock add_dam_block(LpModel& model, const PowerSystem& system,
                       const std::vector<int>& periods, const Grid& bus_demand,
                       const WindBound& wind, const std::string& prefix);

struct DaSchedule {
  std::vector<std::vector<Affine>> p, u, c;  // [unit][period]
};

DaSchedule schedule_from_values(const Grid& p, const Grid& u, const Grid& c);
DaSchedule schedule_from_block(const DamBlock& block);

// Real-time re-dispatch block for one scenario. The objective contribution
// is scaled by `weight`; cost_terms/cost_constant hold the unscaled cost.
struct RtmBlock {
  Index r_up, r_down, u, c, curtail, shed, delta;
  Index balance;
  std::vector<LpTerm> cost_terms;
  double cost_constant = 0.0;

  double cost(const std::vector<double>& x) const;
};

RtmBlock add_rtm_block(LpModel& model, const PowerSystem& system,
                       const std::vector<int>& periods, const Grid& vres_output,
                       const Grid& bus_demand, const DaSchedule& da,
                       double voll, double weight, const std::string& prefix);

// Dual of an LP whose columns are free or fixed: one multiplier per source
// row (>= 0 for inequalities, free for equalities) and one stationarity
// equality per free column, placed into `target`.
struct DualBlock {
  std::vector<std::size_t> lambda;      // per source row
  std::vector<std::size_t> stationary;  // per source column, npos if fixed
};

DualBlock add_dual_block(LpModel& target, const LpModel& source,
                         const std::string& prefix);

std::string label(const std::string& prefix, const std::string& name,
                  const std::string& element, int period);

Grid values(const Index& idx, const std::vector<double>& x);
Grid duals(const Index& idx, const std::vector<double>& y);

}  // namespace vresbid::detail
