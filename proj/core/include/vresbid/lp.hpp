#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vresbid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Sense { kMinimize, kMaximize };

struct LpTerm {
  std::size_t var;
  double coef;
};

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;  // sorted by var, no duplicates
  Relation relation = Relation::kEqual;
  double rhs = 0.0;
};

// Solver-independent LP: variables with bounds, a linear objective with a
// constant, and named linear constraints. Indices are insertion order.
class LpModel {
 public:
  std::size_t add_variable(std::string name, double lower, double upper,
                           double cost = 0.0);
  // Duplicate variables in `terms` are merged; zero coefficients dropped.
  std::size_t add_constraint(std::string name, std::vector<LpTerm> terms,
                             Relation relation, double rhs);

  void add_cost(std::size_t var, double cost) { vars_.at(var).cost += cost; }
  void set_bounds(std::size_t var, double lower, double upper);
  void add_objective_constant(double c) { constant_ += c; }
  void set_sense(Sense sense) { sense_ = sense; }

  Sense sense() const { return sense_; }
  double objective_constant() const { return constant_; }
  const std::vector<LpVariable>& variables() const { return vars_; }
  const std::vector<LpConstraint>& constraints() const { return rows_; }
  const LpVariable& variable(std::size_t j) const { return vars_[j]; }
  const LpConstraint& constraint(std::size_t r) const { return rows_[r]; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_nonzeros() const;

  std::optional<std::size_t> find_variable(std::string_view name) const;
  std::optional<std::size_t> find_constraint(std::string_view name) const;

  // Throws ValidationError on duplicate names, dangling indices, NaNs or
  // crossed bounds.
  void validate() const;

  // Objective value c'x + constant at x.
  double evaluate_objective(const std::vector<double>& x) const;
  // Row activity a_r'x.
  double row_activity(std::size_t r, const std::vector<double>& x) const;

 private:
  Sense sense_ = Sense::kMinimize;
  double constant_ = 0.0;
  std::vector<LpVariable> vars_;
  std::vector<LpConstraint> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

std::string_view to_string(LpStatus s);

// Duals follow the nonnegative convention for a minimization: lambda_r >= 0
// for every inequality row (>= and <= alike), free for equalities, with
//   c = sum_r s_r lambda_r a_r + d,  s_r = +1 for >=/=, -1 for <=,
// so the balance dual of a cost-minimizing dispatch is the nodal price.
// For a maximization the duals belong to the equivalent min of -c'x.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;          // per constraint
  std::vector<double> reduced_cost;  // per variable, d = c - sum_r s_r lambda_r a_r
  std::string message;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

inline constexpr double kDefaultTolerance = 1e-7;

struct SolveOptions {
  double tolerance = kDefaultTolerance;
  // Reject optimal solutions whose scaled primal residual or duality gap
  // exceeds this multiple of `tolerance`.
  double verify_factor = 100.0;
  bool verify = true;
};

LpSolution solve(const LpModel& model, const SolveOptions& options = {});

// Sign multiplier s_r used by the dual convention above.
double dual_sign(Relation r);

// Dual objective recomputed from the model data and the exposed duals.
// Reduced costs that push a variable against an infinite bound are priced at
// the primal point and counted as dual infeasibility by check_strong_duality.
double dual_objective(const LpModel& model, const LpSolution& solution);

// |primal objective - dual objective| + dual infeasibility, from first
// principles; the solver's own objective report is not used.
double check_strong_duality(const LpModel& model, const LpSolution& solution);

// Largest absolute violation over rows and variable bounds.
double primal_residual(const LpModel& model, const LpSolution& solution);

// Largest |lambda_r * slack_r| over inequality rows.
double complementary_slackness(const LpModel& model,
                               const LpSolution& solution);

// CPLEX-LP text export through the backend.
void write_lp(const LpModel& model, const std::filesystem::path& path);

// When set, every solve() also writes its model as <dir>/lp_<n>.lp.
void set_lp_export_directory(std::optional<std::filesystem::path> dir);

}  // namespace vresbid
