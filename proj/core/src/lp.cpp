#include "vresbid/lp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <unordered_set>

#include "Highs.h"
#include "vresbid/errors.hpp"

namespace vresbid {

// ---------------------------------------------------------------------------
// LpModel

std::size_t LpModel::add_variable(std::string name, double lower, double upper,
                                  double cost) {
  vars_.push_back({std::move(name), lower, upper, cost});
  return vars_.size() - 1;
}

std::size_t LpModel::add_constraint(std::string name, std::vector<LpTerm> terms,
                                    Relation relation, double rhs) {
  std::sort(terms.begin(), terms.end(),
            [](const LpTerm& a, const LpTerm& b) { return a.var < b.var; });
  std::vector<LpTerm> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const LpTerm& t) { return t.coef == 0.0; }),
               merged.end());
  rows_.push_back({std::move(name), std::move(merged), relation, rhs});
  return rows_.size() - 1;
}

void LpModel::set_bounds(std::size_t var, double lower, double upper) {
  auto& v = vars_.at(var);
  v.lower = lower;
  v.upper = upper;
}

std::size_t LpModel::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.terms.size();
  return n;
}

std::optional<std::size_t> LpModel::find_variable(std::string_view name) const {
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    if (vars_[j].name == name) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> LpModel::find_constraint(std::string_view name) const {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].name == name) return r;
  }
  return std::nullopt;
}

void LpModel::validate() const {
  std::unordered_set<std::string_view> names;
  names.reserve(vars_.size() + rows_.size());
  for (const auto& v : vars_) {
    if (!names.insert(v.name).second) {
      throw ValidationError("duplicate LP name '" + v.name + "'");
    }
    if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.cost)) {
      throw ValidationError("variable '" + v.name + "' has NaN data");
    }
    if (v.lower > v.upper) {
      throw ValidationError("variable '" + v.name + "' has crossed bounds");
    }
  }
  for (const auto& r : rows_) {
    if (!names.insert(r.name).second) {
      throw ValidationError("duplicate LP name '" + r.name + "'");
    }
    if (!std::isfinite(r.rhs)) {
      throw ValidationError("constraint '" + r.name + "' has non-finite rhs");
    }
    for (const auto& t : r.terms) {
      if (t.var >= vars_.size()) {
        throw ValidationError("constraint '" + r.name +
                              "' references an undeclared variable");
      }
      if (!std::isfinite(t.coef)) {
        throw ValidationError("constraint '" + r.name +
                              "' has a non-finite coefficient");
      }
    }
  }
  if (!std::isfinite(constant_)) {
    throw ValidationError("objective constant is not finite");
  }
}

double LpModel::evaluate_objective(const std::vector<double>& x) const {
  double v = constant_;
  for (std::size_t j = 0; j < vars_.size(); ++j) v += vars_[j].cost * x[j];
  return v;
}

double LpModel::row_activity(std::size_t r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : rows_[r].terms) a += t.coef * x[t.var];
  return a;
}

// ---------------------------------------------------------------------------
// Checks

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

double dual_sign(Relation r) { return r == Relation::kLessEqual ? -1.0 : 1.0; }

namespace {

double min_sign(const LpModel& model) {
  return model.sense() == Sense::kMaximize ? -1.0 : 1.0;
}

// d = c - sum_r s_r lambda_r a_r for the minimization form.
std::vector<double> compute_reduced_costs(const LpModel& model,
                                          const std::vector<double>& dual) {
  const double ms = min_sign(model);
  std::vector<double> d(model.num_variables());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = ms * model.variable(j).cost;
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& row = model.constraint(r);
    const double y = dual_sign(row.relation) * dual[r];
    if (y == 0.0) continue;
    for (const auto& t : row.terms) d[t.var] -= t.coef * y;
  }
  return d;
}

struct DualParts {
  double objective = 0.0;
  double infeasibility = 0.0;
};

DualParts dual_parts(const LpModel& model, const LpSolution& sol) {
  DualParts out;
  double g = min_sign(model) * model.objective_constant();
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& row = model.constraint(r);
    const double lam = sol.dual[r];
    g += row.rhs * dual_sign(row.relation) * lam;
    if (row.relation != Relation::kEqual && lam < 0.0) {
      out.infeasibility += -lam;
    }
  }
  const auto d = compute_reduced_costs(model, sol.dual);
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& v = model.variable(j);
    const double dj = d[j];
    if (dj == 0.0) continue;
    const double bound = dj > 0.0 ? v.lower : v.upper;
    if (std::isfinite(bound)) {
      g += bound * dj;
    } else {
      g += sol.primal[j] * dj;
      out.infeasibility += std::abs(dj) * std::max(1.0, std::abs(sol.primal[j]));
    }
  }
  out.objective = min_sign(model) * g;
  return out;
}

}  // namespace

double dual_objective(const LpModel& model, const LpSolution& solution) {
  return dual_parts(model, solution).objective;
}

double check_strong_duality(const LpModel& model, const LpSolution& solution) {
  const auto parts = dual_parts(model, solution);
  const double primal = model.evaluate_objective(solution.primal);
  return std::abs(primal - parts.objective) + parts.infeasibility;
}

double primal_residual(const LpModel& model, const LpSolution& solution) {
  const auto& x = solution.primal;
  double worst = 0.0;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    worst = std::max({worst, v.lower - x[j], x[j] - v.upper});
  }
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& row = model.constraint(r);
    const double a = model.row_activity(r, x);
    switch (row.relation) {
      case Relation::kLessEqual:
        worst = std::max(worst, a - row.rhs);
        break;
      case Relation::kGreaterEqual:
        worst = std::max(worst, row.rhs - a);
        break;
      case Relation::kEqual:
        worst = std::max(worst, std::abs(a - row.rhs));
        break;
    }
  }
  return worst;
}

double complementary_slackness(const LpModel& model,
                               const LpSolution& solution) {
  double worst = 0.0;
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& row = model.constraint(r);
    if (row.relation == Relation::kEqual) continue;
    const double slack = std::abs(model.row_activity(r, solution.primal) - row.rhs);
    worst = std::max(worst, std::abs(solution.dual[r] * slack));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// HiGHS adapter

namespace {

std::mutex g_export_mutex;
std::optional<std::filesystem::path> g_export_dir;
std::atomic<std::size_t> g_export_counter{0};

HighsLp to_highs(const LpModel& model) {
  HighsLp lp;
  const auto n = static_cast<HighsInt>(model.num_variables());
  const auto m = static_cast<HighsInt>(model.num_constraints());
  lp.num_col_ = n;
  lp.num_row_ = m;
  lp.sense_ = ObjSense::kMinimize;
  const double ms = min_sign(model);
  lp.offset_ = ms * model.objective_constant();
  lp.col_cost_.resize(n);
  lp.col_lower_.resize(n);
  lp.col_upper_.resize(n);
  lp.col_names_.resize(n);
  for (HighsInt j = 0; j < n; ++j) {
    const auto& v = model.variable(j);
    lp.col_cost_[j] = ms * v.cost;
    lp.col_lower_[j] = v.lower;
    lp.col_upper_[j] = v.upper;
    lp.col_names_[j] = v.name;
  }
  lp.row_lower_.resize(m);
  lp.row_upper_.resize(m);
  lp.row_names_.resize(m);
  std::vector<HighsInt> count(n, 0);
  for (HighsInt r = 0; r < m; ++r) {
    const auto& row = model.constraint(r);
    lp.row_names_[r] = row.name;
    lp.row_lower_[r] = row.relation == Relation::kLessEqual ? -kHighsInf : row.rhs;
    lp.row_upper_[r] = row.relation == Relation::kGreaterEqual ? kHighsInf : row.rhs;
    for (const auto& t : row.terms) ++count[t.var];
  }
  auto& a = lp.a_matrix_;
  a.format_ = MatrixFormat::kColwise;
  a.num_col_ = n;
  a.num_row_ = m;
  a.start_.assign(n + 1, 0);
  for (HighsInt j = 0; j < n; ++j) a.start_[j + 1] = a.start_[j] + count[j];
  a.index_.resize(a.start_[n]);
  a.value_.resize(a.start_[n]);
  std::vector<HighsInt> fill(a.start_.begin(), a.start_.end() - 1);
  for (HighsInt r = 0; r < m; ++r) {
    for (const auto& t : model.constraint(r).terms) {
      const HighsInt pos = fill[t.var]++;
      a.index_[pos] = r;
      a.value_[pos] = t.coef;
    }
  }
  return lp;
}

void configure(Highs& highs, double tolerance) {
  highs.setOptionValue("output_flag", false);
  highs.setOptionValue("log_to_console", false);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("parallel", "off");
  highs.setOptionValue("solver", "simplex");
  highs.setOptionValue("random_seed", 0);
  const double feas = std::min(tolerance, 1e-7);
  highs.setOptionValue("primal_feasibility_tolerance", feas);
  highs.setOptionValue("dual_feasibility_tolerance", feas);
}

std::string status_text(Highs& highs, HighsModelStatus s) {
  return highs.modelStatusToString(s);
}

// Runs one solve; returns the model status.
HighsModelStatus run(Highs& highs, const HighsLp& lp, bool presolve) {
  highs.setOptionValue("presolve", presolve ? "on" : "off");
  if (highs.passModel(lp) == HighsStatus::kError) {
    throw SolverError("HiGHS rejected the model");
  }
  if (highs.run() == HighsStatus::kError) {
    return HighsModelStatus::kSolveError;
  }
  return highs.getModelStatus();
}

void maybe_export(const LpModel& model) {
  std::optional<std::filesystem::path> dir;
  {
    std::lock_guard<std::mutex> lock(g_export_mutex);
    dir = g_export_dir;
  }
  if (!dir) return;
  const auto n = g_export_counter.fetch_add(1);
  write_lp(model, *dir / ("lp_" + std::to_string(n) + ".lp"));
}

}  // namespace

void set_lp_export_directory(std::optional<std::filesystem::path> dir) {
  std::lock_guard<std::mutex> lock(g_export_mutex);
  g_export_dir = std::move(dir);
}

void write_lp(const LpModel& model, const std::filesystem::path& path) {
  model.validate();
  Highs highs;
  highs.setOptionValue("output_flag", false);
  if (highs.passModel(to_highs(model)) == HighsStatus::kError) {
    throw SolverError("HiGHS rejected the model");
  }
  if (highs.writeModel(path.string()) == HighsStatus::kError) {
    throw SolverError("cannot write LP file " + path.string());
  }
}

LpSolution solve(const LpModel& model, const SolveOptions& options) {
  model.validate();
  maybe_export(model);
  const HighsLp lp = to_highs(model);

  Highs highs;
  configure(highs, options.tolerance);
  HighsModelStatus status = run(highs, lp, true);
  // Presolve may stop at "infeasible or unbounded", or fail on a model it
  // reduced badly; a plain simplex run settles both.
  if (status == HighsModelStatus::kUnboundedOrInfeasible ||
      status == HighsModelStatus::kSolveError ||
      status == HighsModelStatus::kUnknown) {
    highs.clearSolver();
    status = run(highs, lp, false);
  }

  LpSolution sol;
  sol.message = status_text(highs, status);
  switch (status) {
    case HighsModelStatus::kOptimal:
      sol.status = LpStatus::kOptimal;
      break;
    case HighsModelStatus::kInfeasible:
      sol.status = LpStatus::kInfeasible;
      return sol;
    case HighsModelStatus::kUnbounded:
      sol.status = LpStatus::kUnbounded;
      return sol;
    case HighsModelStatus::kUnboundedOrInfeasible: {
      // Decide with a zero objective: feasible means unbounded.
      HighsLp probe = lp;
      std::fill(probe.col_cost_.begin(), probe.col_cost_.end(), 0.0);
      highs.clearSolver();
      const auto s = run(highs, probe, false);
      sol.status = s == HighsModelStatus::kOptimal ? LpStatus::kUnbounded
                                                   : LpStatus::kInfeasible;
      return sol;
    }
    default:
      throw SolverError("LP solve failed: " + sol.message);
  }

  const HighsSolution& hs = highs.getSolution();
  if (!hs.value_valid || !hs.dual_valid) {
    throw SolverError("HiGHS reported optimal without primal/dual values");
  }
  sol.primal = hs.col_value;
  sol.dual.resize(model.num_constraints());
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    sol.dual[r] = dual_sign(model.constraint(r).relation) * hs.row_dual[r];
  }
  sol.reduced_cost = compute_reduced_costs(model, sol.dual);
  sol.objective = model.evaluate_objective(sol.primal);

  if (options.verify) {
    const double limit = options.verify_factor * options.tolerance;
    const double scale = 1.0 + std::abs(sol.objective);
    const double pres = primal_residual(model, sol);
    const double gap = check_strong_duality(model, sol);
    if (pres > limit * 10.0 || gap > limit * scale) {
      throw SolverError("LP solution failed post-solve checks: primal residual " +
                        std::to_string(pres) + ", duality residual " +
                        std::to_string(gap));
    }
  }
  return sol;
}

}  // namespace vresbid
