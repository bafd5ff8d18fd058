#include "blocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vresbid/errors.hpp"

namespace vresbid::detail {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void append(std::vector<LpTerm>& terms, const Affine& a, double scale = 1.0) {
  for (const auto& t : a.terms) terms.push_back({t.var, scale * t.coef});
}
}  // namespace

Index make_index(std::size_t rows, std::size_t cols) {
  return Index(rows, std::vector<std::size_t>(cols, kNone));
}

std::string label(const std::string& prefix, const std::string& name,
                  const std::string& element, int period) {
  return prefix + name + "[" + element + "," + std::to_string(period) + "]";
}

Grid values(const Index& idx, const std::vector<double>& x) {
  Grid g(idx.size());
  for (std::size_t e = 0; e < idx.size(); ++e) {
    g[e].reserve(idx[e].size());
    for (std::size_t j : idx[e]) g[e].push_back(x[j]);
  }
  return g;
}

Grid duals(const Index& idx, const std::vector<double>& y) { return values(idx, y); }

// ---------------------------------------------------------------------------

DamBlock add_dam_block(LpModel& m, const PowerSystem& sys,
                       const std::vector<int>& periods, const Grid& bus_demand,
                       const WindBound& wind, const std::string& prefix) {
  const std::size_t T = periods.size();
  const std::size_t I = sys.num_units(), K = sys.num_vres(), N = sys.num_buses(),
                    L = sys.num_lines();
  DamBlock b;
  b.p = b.u = b.c = make_index(I, T);
  b.pw = make_index(K, T);
  b.delta = make_index(N, T);
  b.balance = make_index(N, T);
  b.line_lo = b.line_up = make_index(L, T);
  b.w_lo = b.w_up = make_index(K, T);
  b.cap_lo = b.cap_up = b.u_lo = b.u_up = b.s1 = b.s2 = b.ramp_dn = b.ramp_up =
      make_index(I, T);

  const std::size_t ref = sys.reference_bus();
  for (std::size_t t = 0; t < T; ++t) {
    const int per = periods[t];
    for (std::size_t i = 0; i < I; ++i) {
      const auto& g = sys.units()[i];
      b.p[i][t] = m.add_variable(label(prefix, "p", g.id, per), -kInf, kInf,
                                 g.variable_cost);
      b.u[i][t] = m.add_variable(label(prefix, "u", g.id, per), -kInf, kInf,
                                 g.no_load_cost);
      b.c[i][t] = m.add_variable(label(prefix, "c", g.id, per), -kInf, kInf, 1.0);
      b.cost_terms.push_back({b.p[i][t], g.variable_cost});
      b.cost_terms.push_back({b.u[i][t], g.no_load_cost});
      b.cost_terms.push_back({b.c[i][t], 1.0});
    }
    for (std::size_t k = 0; k < K; ++k) {
      b.pw[k][t] = m.add_variable(label(prefix, "pW", sys.vres()[k].id, per),
                                  -kInf, kInf);
    }
    for (std::size_t n = 0; n < N; ++n) {
      const double bound = n == ref ? 0.0 : kInf;
      b.delta[n][t] = m.add_variable(label(prefix, "delta", sys.buses()[n].id, per),
                                     -bound, bound);
    }

    std::vector<std::vector<LpTerm>> bal(N);
    for (std::size_t i = 0; i < I; ++i) bal[sys.unit_bus(i)].push_back({b.p[i][t], 1.0});
    for (std::size_t k = 0; k < K; ++k) bal[sys.vres_bus(k)].push_back({b.pw[k][t], 1.0});
    for (std::size_t l = 0; l < L; ++l) {
      const double s = 1.0 / sys.lines()[l].reactance;
      const std::size_t a = sys.line_from(l), z = sys.line_to(l);
      bal[a].push_back({b.delta[a][t], -s});
      bal[a].push_back({b.delta[z][t], s});
      bal[z].push_back({b.delta[a][t], s});
      bal[z].push_back({b.delta[z][t], -s});
    }
    for (std::size_t n = 0; n < N; ++n) {
      b.balance[n][t] = m.add_constraint(label(prefix, "balance", sys.buses()[n].id, per),
                                         std::move(bal[n]), Relation::kEqual,
                                         bus_demand[n][t]);
    }
    for (std::size_t l = 0; l < L; ++l) {
      const auto& line = sys.lines()[l];
      const double s = 1.0 / line.reactance;
      const std::size_t a = sys.line_from(l), z = sys.line_to(l);
      const std::string id = line.from + "-" + line.to + "#" + std::to_string(l);
      b.line_lo[l][t] = m.add_constraint(label(prefix, "flow_lo", id, per),
                                         {{b.delta[a][t], s}, {b.delta[z][t], -s}},
                                         Relation::kGreaterEqual, -line.capacity);
      b.line_up[l][t] = m.add_constraint(label(prefix, "flow_up", id, per),
                                         {{b.delta[a][t], s}, {b.delta[z][t], -s}},
                                         Relation::kLessEqual, line.capacity);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const auto& id = sys.vres()[k].id;
      b.w_lo[k][t] = m.add_constraint(label(prefix, "w_lo", id, per),
                                      {{b.pw[k][t], 1.0}}, Relation::kGreaterEqual, 0.0);
      if (wind.variable) {
        b.w_up[k][t] = m.add_constraint(label(prefix, "w_up", id, per),
                                        {{b.pw[k][t], 1.0}, {(*wind.variable)[k][t], -1.0}},
                                        Relation::kLessEqual, 0.0);
      } else {
        b.w_up[k][t] = m.add_constraint(label(prefix, "w_up", id, per),
                                        {{b.pw[k][t], 1.0}}, Relation::kLessEqual,
                                        (*wind.constant)[k][t]);
      }
    }
    for (std::size_t i = 0; i < I; ++i) {
      const auto& g = sys.units()[i];
      const auto p = b.p[i][t], u = b.u[i][t], c = b.c[i][t];
      b.cap_lo[i][t] = m.add_constraint(label(prefix, "cap_lo", g.id, per),
                                        {{p, 1.0}, {u, -g.p_min}},
                                        Relation::kGreaterEqual, 0.0);
      b.cap_up[i][t] = m.add_constraint(label(prefix, "cap_up", g.id, per),
                                        {{p, 1.0}, {u, -g.p_max}},
                                        Relation::kLessEqual, 0.0);
      b.u_lo[i][t] = m.add_constraint(label(prefix, "u_lo", g.id, per), {{u, 1.0}},
                                      Relation::kGreaterEqual, 0.0);
      b.u_up[i][t] = m.add_constraint(label(prefix, "u_up", g.id, per), {{u, 1.0}},
                                      Relation::kLessEqual, 1.0);
      if (t == 0) {
        b.s1[i][t] = m.add_constraint(label(prefix, "startup", g.id, per),
                                      {{u, g.startup_cost}, {c, -1.0}},
                                      Relation::kLessEqual,
                                      g.startup_cost * g.initial_commitment);
      } else {
        b.s1[i][t] = m.add_constraint(
            label(prefix, "startup", g.id, per),
            {{u, g.startup_cost}, {b.u[i][t - 1], -g.startup_cost}, {c, -1.0}},
            Relation::kLessEqual, 0.0);
      }
      b.s2[i][t] = m.add_constraint(label(prefix, "startup_lo", g.id, per), {{c, 1.0}},
                                    Relation::kGreaterEqual, 0.0);
      if (t == 0) {
        b.ramp_dn[i][t] = m.add_constraint(
            label(prefix, "ramp_dn", g.id, per), {{p, 1.0}}, Relation::kGreaterEqual,
            g.initial_output - g.ramp_down * g.initial_commitment);
        b.ramp_up[i][t] = m.add_constraint(label(prefix, "ramp_up", g.id, per),
                                           {{p, 1.0}, {u, -g.ramp_up}},
                                           Relation::kLessEqual, g.initial_output);
      } else {
        const auto pp = b.p[i][t - 1], up = b.u[i][t - 1];
        b.ramp_dn[i][t] = m.add_constraint(
            label(prefix, "ramp_dn", g.id, per),
            {{p, 1.0}, {pp, -1.0}, {up, g.ramp_down}}, Relation::kGreaterEqual, 0.0);
        b.ramp_up[i][t] = m.add_constraint(
            label(prefix, "ramp_up", g.id, per),
            {{p, 1.0}, {pp, -1.0}, {u, -g.ramp_up}}, Relation::kLessEqual, 0.0);
      }
    }
  }
  return b;
}

DaSchedule schedule_from_values(const Grid& p, const Grid& u, const Grid& c) {
  DaSchedule s;
  auto conv = [](const Grid& g) {
    std::vector<std::vector<Affine>> out(g.size());
    for (std::size_t e = 0; e < g.size(); ++e) {
      for (double v : g[e]) out[e].push_back(Affine::of(v));
    }
    return out;
  };
  s.p = conv(p);
  s.u = conv(u);
  s.c = conv(c);
  return s;
}

DaSchedule schedule_from_block(const DamBlock& b) {
  DaSchedule s;
  auto conv = [](const Index& idx) {
    std::vector<std::vector<Affine>> out(idx.size());
    for (std::size_t e = 0; e < idx.size(); ++e) {
      for (std::size_t j : idx[e]) out[e].push_back(Affine::var(j));
    }
    return out;
  };
  s.p = conv(b.p);
  s.u = conv(b.u);
  s.c = conv(b.c);
  return s;
}

// ---------------------------------------------------------------------------

double RtmBlock::cost(const std::vector<double>& x) const {
  double v = cost_constant;
  for (const auto& t : cost_terms) v += t.coef * x[t.var];
  return v;
}

RtmBlock add_rtm_block(LpModel& m, const PowerSystem& sys,
                       const std::vector<int>& periods, const Grid& vres_output,
                       const Grid& bus_demand, const DaSchedule& da, double voll,
                       double weight, const std::string& prefix) {
  const std::size_t T = periods.size();
  const std::size_t I = sys.num_units(), K = sys.num_vres(), N = sys.num_buses(),
                    L = sys.num_lines();
  RtmBlock b;
  b.r_up = b.r_down = b.u = b.c = make_index(I, T);
  b.curtail = make_index(K, T);
  b.shed = b.delta = b.balance = make_index(N, T);

  auto cost = [&](std::size_t j, double coef) {
    if (coef == 0.0) return;
    m.add_cost(j, weight * coef);
    b.cost_terms.push_back({j, coef});
  };
  auto cost_affine = [&](const Affine& a, double coef) {
    if (coef == 0.0) return;
    for (const auto& t : a.terms) cost(t.var, coef * t.coef);
    m.add_objective_constant(weight * coef * a.constant);
    b.cost_constant += coef * a.constant;
  };

  const std::size_t ref = sys.reference_bus();
  for (std::size_t t = 0; t < T; ++t) {
    const int per = periods[t];
    for (std::size_t i = 0; i < I; ++i) {
      const auto& g = sys.units()[i];
      const Affine& ustar = da.u[i][t];
      b.r_up[i][t] = m.add_variable(label(prefix, "rU", g.id, per), 0.0, kInf);
      b.r_down[i][t] = m.add_variable(label(prefix, "rD", g.id, per), 0.0, kInf);
      double ulo = 0.0, uhi = 1.0;
      if (ustar.is_constant()) {
        const double v = std::clamp(ustar.constant, 0.0, 1.0);
        ulo = v;
        uhi = g.startup_class == StartupClass::kFast ? 1.0 : v;
      }
      b.u[i][t] = m.add_variable(label(prefix, "uRT", g.id, per), ulo, uhi);
      b.c[i][t] = m.add_variable(label(prefix, "cRT", g.id, per), 0.0, kInf);
      cost(b.r_up[i][t], g.redispatch_up_cost);
      cost(b.r_down[i][t], -g.redispatch_down_cost);
      cost(b.u[i][t], g.no_load_cost);
      cost_affine(ustar, -g.no_load_cost);
      cost(b.c[i][t], 1.0);
    }
    for (std::size_t k = 0; k < K; ++k) {
      b.curtail[k][t] = m.add_variable(label(prefix, "pWcr", sys.vres()[k].id, per),
                                       0.0, vres_output[k][t]);
    }
    for (std::size_t n = 0; n < N; ++n) {
      const auto& id = sys.buses()[n].id;
      b.shed[n][t] = m.add_variable(label(prefix, "lsh", id, per), 0.0,
                                    bus_demand[n][t]);
      cost(b.shed[n][t], voll);
      const double bound = n == ref ? 0.0 : kInf;
      b.delta[n][t] = m.add_variable(label(prefix, "delta", id, per), -bound, bound);
    }

    std::vector<std::vector<LpTerm>> bal(N);
    std::vector<double> rhs(N);
    for (std::size_t n = 0; n < N; ++n) {
      rhs[n] = bus_demand[n][t];
      bal[n].push_back({b.shed[n][t], 1.0});
    }
    for (std::size_t i = 0; i < I; ++i) {
      const std::size_t n = sys.unit_bus(i);
      bal[n].push_back({b.r_up[i][t], 1.0});
      bal[n].push_back({b.r_down[i][t], -1.0});
      append(bal[n], da.p[i][t]);
      rhs[n] -= da.p[i][t].constant;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t n = sys.vres_bus(k);
      bal[n].push_back({b.curtail[k][t], -1.0});
      rhs[n] -= vres_output[k][t];
    }
    for (std::size_t l = 0; l < L; ++l) {
      const double s = 1.0 / sys.lines()[l].reactance;
      const std::size_t a = sys.line_from(l), z = sys.line_to(l);
      bal[a].push_back({b.delta[a][t], -s});
      bal[a].push_back({b.delta[z][t], s});
      bal[z].push_back({b.delta[a][t], s});
      bal[z].push_back({b.delta[z][t], -s});
    }
    for (std::size_t n = 0; n < N; ++n) {
      b.balance[n][t] = m.add_constraint(label(prefix, "balance", sys.buses()[n].id, per),
                                         std::move(bal[n]), Relation::kEqual, rhs[n]);
    }
    for (std::size_t l = 0; l < L; ++l) {
      const auto& line = sys.lines()[l];
      const double s = 1.0 / line.reactance;
      const std::size_t a = sys.line_from(l), z = sys.line_to(l);
      const std::string id = line.from + "-" + line.to + "#" + std::to_string(l);
      m.add_constraint(label(prefix, "flow_lo", id, per),
                       {{b.delta[a][t], s}, {b.delta[z][t], -s}},
                       Relation::kGreaterEqual, -line.capacity);
      m.add_constraint(label(prefix, "flow_up", id, per),
                       {{b.delta[a][t], s}, {b.delta[z][t], -s}}, Relation::kLessEqual,
                       line.capacity);
    }
    for (std::size_t i = 0; i < I; ++i) {
      const auto& g = sys.units()[i];
      const auto ru = b.r_up[i][t], rd = b.r_down[i][t], u = b.u[i][t],
                 c = b.c[i][t];
      const Affine& pstar = da.p[i][t];
      const Affine& ustar = da.u[i][t];
      const Affine& cstar = da.c[i][t];

      if (!ustar.is_constant()) {
        std::vector<LpTerm> terms{{u, 1.0}};
        append(terms, ustar, -1.0);
        const bool fast = g.startup_class == StartupClass::kFast;
        m.add_constraint(label(prefix, fast ? "u_fast" : "u_slow", g.id, per),
                         std::move(terms),
                         fast ? Relation::kGreaterEqual : Relation::kEqual,
                         ustar.constant);
      }

      // Total output g_t = p*_t + rU_t - rD_t.
      auto output = [&](std::size_t tt, double scale, std::vector<LpTerm>& terms,
                        double& constant) {
        terms.push_back({b.r_up[i][tt], scale});
        terms.push_back({b.r_down[i][tt], -scale});
        append(terms, da.p[i][tt], scale);
        constant += scale * da.p[i][tt].constant;
      };

      {
        std::vector<LpTerm> lo{{ru, 1.0}, {rd, -1.0}, {u, -g.p_min}};
        append(lo, pstar);
        m.add_constraint(label(prefix, "cap_lo", g.id, per), std::move(lo),
                         Relation::kGreaterEqual, -pstar.constant);
        std::vector<LpTerm> hi{{ru, 1.0}, {rd, -1.0}, {u, -g.p_max}};
        append(hi, pstar);
        m.add_constraint(label(prefix, "cap_up", g.id, per), std::move(hi),
                         Relation::kLessEqual, -pstar.constant);
      }
      {
        std::vector<LpTerm> su{{c, 1.0}, {u, -g.startup_cost}};
        append(su, cstar);
        double r = -cstar.constant;
        if (t == 0) {
          r -= g.startup_cost * g.initial_commitment;
        } else {
          su.push_back({b.u[i][t - 1], g.startup_cost});
        }
        m.add_constraint(label(prefix, "startup", g.id, per), std::move(su),
                         Relation::kGreaterEqual, r);
      }
      {
        std::vector<LpTerm> dn, up;
        double kdn = 0.0, kup = 0.0;
        output(t, 1.0, dn, kdn);
        output(t, 1.0, up, kup);
        up.push_back({u, -g.ramp_up});
        double rdn = -kdn, rup = -kup;
        if (t == 0) {
          rdn += g.initial_output - g.ramp_down * g.initial_commitment;
          rup += g.initial_output;
        } else {
          double k2 = 0.0;
          output(t - 1, -1.0, dn, k2);
          rdn -= k2;
          double k3 = 0.0;
          output(t - 1, -1.0, up, k3);
          rup -= k3;
          dn.push_back({b.u[i][t - 1], g.ramp_down});
        }
        m.add_constraint(label(prefix, "ramp_dn", g.id, per), std::move(dn),
                         Relation::kGreaterEqual, rdn);
        m.add_constraint(label(prefix, "ramp_up", g.id, per), std::move(up),
                         Relation::kLessEqual, rup);
      }
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

DualBlock add_dual_block(LpModel& target, const LpModel& source,
                         const std::string& prefix) {
  if (source.sense() != Sense::kMinimize) {
    throw ValidationError("dualization expects a minimization");
  }
  DualBlock d;
  d.lambda.resize(source.num_constraints());
  std::vector<std::vector<LpTerm>> columns(source.num_variables());
  for (std::size_t r = 0; r < source.num_constraints(); ++r) {
    const auto& row = source.constraint(r);
    const bool eq = row.relation == Relation::kEqual;
    d.lambda[r] = target.add_variable(prefix + row.name, eq ? -kInf : 0.0, kInf);
    const double s = dual_sign(row.relation);
    for (const auto& t : row.terms) columns[t.var].push_back({d.lambda[r], s * t.coef});
  }
  d.stationary.assign(source.num_variables(), kNone);
  for (std::size_t j = 0; j < source.num_variables(); ++j) {
    const auto& v = source.variable(j);
    if (v.lower == v.upper) continue;
    if (std::isfinite(v.lower) || std::isfinite(v.upper)) {
      throw ValidationError("dualization expects free or fixed columns");
    }
    d.stationary[j] = target.add_constraint(prefix + "stat." + v.name,
                                            std::move(columns[j]), Relation::kEqual,
                                            v.cost);
  }
  return d;
}

}  // namespace vresbid::detail
