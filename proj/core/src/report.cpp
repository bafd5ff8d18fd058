#include "vresbid/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "vresbid/errors.hpp"

namespace vresbid {

namespace {

double weighted_std(const std::vector<double>& x, const std::vector<double>& w) {
  double mean = 0.0, total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean += w[i] * x[i];
    total += w[i];
  }
  if (total <= 0.0) return 0.0;
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += w[i] * (x[i] - mean) * (x[i] - mean);
  return std::sqrt(std::max(0.0, var / total));
}

double plain_std(const std::vector<double>& x) {
  return weighted_std(x, std::vector<double>(x.size(), 1.0));
}

}  // namespace

SettlementReport settle(const PowerSystem& system, const ScenarioSet& scenarios,
                        const DamSolution& dam, const RtmResults& rtm) {
  SettlementReport r;
  const std::size_t T = dam.periods.size();
  const std::size_t S = rtm.scenarios.size();
  const Grid& price = dam.duals.balance;
  const bool priced = price.size() == system.num_buses();
  auto da_price = [&](std::size_t n, std::size_t t) { return priced ? price[n][t] : 0.0; };

  for (std::size_t k = 0; k < system.num_vres(); ++k) {
    ParticipantSettlement p;
    p.id = system.vres()[k].id;
    p.vres = true;
    const std::size_t n = system.vres_bus(k);
    for (std::size_t t = 0; t < T; ++t) p.dam_payment += da_price(n, t) * dam.pw[k][t];
    p.dam_revenue = p.dam_payment;
    for (std::size_t w = 0; w < S; ++w) {
      const RtmSolution& rt = rtm.scenarios[w];
      const Grid& out = scenarios.scenario(rt.scenario).vres_output;
      double s = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        s += rt.price[n][t] * ((out[k][t] - rt.curtail[k][t]) - dam.pw[k][t]);
      }
      p.rt_by_scenario.push_back(s);
      p.rt_settlement += scenarios.weight(rt.scenario) * s;
    }
    p.total = p.dam_revenue + p.rt_settlement;
    r.vres.push_back(std::move(p));
  }

  for (std::size_t i = 0; i < system.num_units(); ++i) {
    const ConventionalUnit& g = system.units()[i];
    ParticipantSettlement p;
    p.id = g.id;
    const std::size_t n = system.unit_bus(i);
    for (std::size_t t = 0; t < T; ++t) {
      p.dam_payment += da_price(n, t) * dam.p[i][t];
      p.dam_cost += g.variable_cost * dam.p[i][t] + g.no_load_cost * dam.u[i][t] + dam.c[i][t];
    }
    p.dam_revenue = p.dam_payment - p.dam_cost;
    for (std::size_t w = 0; w < S; ++w) {
      const RtmSolution& rt = rtm.scenarios[w];
      double s = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double up = rt.r_up[i][t], down = rt.r_down[i][t];
        s += rt.price[n][t] * (up - down);
        s -= g.redispatch_up_cost * up - g.redispatch_down_cost * down +
             g.no_load_cost * (rt.u[i][t] - dam.u[i][t]) + rt.c[i][t];
      }
      p.rt_by_scenario.push_back(s);
      p.rt_settlement += scenarios.weight(rt.scenario) * s;
    }
    p.total = p.dam_revenue + p.rt_settlement;
    r.units.push_back(std::move(p));
  }

  const Grid demand = scenarios.da_bus_demand(system);
  for (std::size_t n = 0; n < system.num_buses(); ++n) {
    for (std::size_t t = 0; t < T; ++t) r.dam_load_payment += da_price(n, t) * demand[n][t];
  }
  for (std::size_t l = 0; l < system.num_lines(); ++l) {
    const std::size_t a = system.line_from(l), b = system.line_to(l);
    for (std::size_t t = 0; t < T; ++t) {
      const double flow = (dam.delta[a][t] - dam.delta[b][t]) / system.lines()[l].reactance;
      r.dam_congestion_rent += flow * (da_price(b, t) - da_price(a, t));
    }
  }
  double paid = 0.0;
  for (const auto& p : r.vres) paid += p.dam_payment;
  for (const auto& p : r.units) paid += p.dam_payment;
  r.dam_surplus_residual = std::abs(r.dam_load_payment - paid - r.dam_congestion_rent);
  return r;
}

PriceTables price_tables(const ScenarioSet& scenarios, const DamSolution& dam,
                         const RtmResults& rtm) {
  PriceTables p;
  p.dam = dam.duals.balance;
  const std::size_t T = dam.periods.size();
  const std::size_t N = p.dam.empty() ? (rtm.scenarios.empty() ? 0 : rtm.scenarios[0].price.size())
                                      : p.dam.size();
  const std::size_t S = rtm.scenarios.size();
  std::vector<double> weights;
  for (const auto& rt : rtm.scenarios) {
    p.rt.push_back(rt.price);
    weights.push_back(scenarios.weight(rt.scenario));
  }

  p.dam_node_std.assign(T, 0.0);
  if (!p.dam.empty()) {
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> col;
      for (std::size_t n = 0; n < N; ++n) col.push_back(p.dam[n][t]);
      p.dam_node_std[t] = plain_std(col);
    }
  }

  p.rt_scenario_mean = make_grid(N, T);
  p.rt_node_mean = make_grid(S, T);
  p.rt_node_std.assign(T, 0.0);
  p.rt_scenario_std.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> per_node(N), per_scenario(S);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t w = 0; w < S; ++w) p.rt_scenario_mean[n][t] += weights[w] * p.rt[w][n][t];
      per_node[n] = p.rt_scenario_mean[n][t];
    }
    for (std::size_t w = 0; w < S; ++w) {
      double sum = 0.0;
      for (std::size_t n = 0; n < N; ++n) sum += p.rt[w][n][t];
      p.rt_node_mean[w][t] = N ? sum / static_cast<double>(N) : 0.0;
      per_scenario[w] = p.rt_node_mean[w][t];
    }
    p.rt_node_std[t] = plain_std(per_node);
    p.rt_scenario_std[t] = weighted_std(per_scenario, weights);
  }
  return p;
}

UcQualityReport uc_quality(const DamSolution& dam, const RtmResults& rtm, double epsilon) {
  UcQualityReport q;
  q.epsilon = epsilon;
  q.da_histogram.assign(10, 0);
  q.rt_histogram.assign(10, 0);
  auto tally = [&](double u, std::size_t& frac, std::size_t& total,
                   std::vector<std::size_t>& hist) {
    ++total;
    if (u > epsilon && u < 1.0 - epsilon) ++frac;
    const double c = std::clamp(u, 0.0, 1.0);
    hist[std::min<std::size_t>(9, static_cast<std::size_t>(c * 10.0))]++;
  };
  for (const auto& row : dam.u) {
    for (double u : row) tally(u, q.da_fractional, q.da_total, q.da_histogram);
  }
  for (const auto& rt : rtm.scenarios) {
    for (const auto& row : rt.u) {
      for (double u : row) tally(u, q.rt_fractional, q.rt_total, q.rt_histogram);
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) {
    return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  q.da_fraction = ratio(q.da_fractional, q.da_total);
  q.rt_fraction = ratio(q.rt_fractional, q.rt_total);
  q.fraction = ratio(q.da_fractional + q.rt_fractional, q.da_total + q.rt_total);
  return q;
}

RunRecord make_record(std::string point, nlohmann::json parameters,
                      const PowerSystem& system, const ScenarioSet& scenarios,
                      CostReport report) {
  RunRecord r;
  r.point = std::move(point);
  r.parameters = std::move(parameters);
  r.settlement = settle(system, scenarios, report.dam, report.rtm);
  r.prices = price_tables(scenarios, report.dam, report.rtm);
  r.uc = uc_quality(report.dam, report.rtm);
  r.report = std::move(report);
  return r;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fw(const CostReport& r) { return std::string(to_string(r.framework)); }

std::string histogram(const std::vector<std::size_t>& h) {
  std::string s;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(h[i]);
  }
  return s;
}

}  // namespace

void write_costs_csv(std::ostream& os, const std::vector<RunRecord>& records,
                     const std::vector<FailureRecord>& failures) {
  os << "point,framework,status,total,dam_cost,expected_rt_cost,cost_std,"
        "relaxed_objective,bid_total,message\n";
  for (const auto& rec : records) {
    const CostReport& r = rec.report;
    os << csv_field(rec.point) << ',' << fw(r) << ",ok," << format_number(r.total) << ','
       << format_number(r.dam_cost) << ',' << format_number(r.expected_rt_cost) << ','
       << format_number(r.cost_std) << ','
       << (r.relaxed_objective ? format_number(*r.relaxed_objective) : "") << ','
       << (r.bids ? format_number(r.bids->total()) : "") << ",\n";
  }
  for (const auto& f : failures) {
    os << csv_field(f.point) << ',' << csv_field(f.framework) << ",failed,,,,,,,"
       << csv_field(f.error + ": " + f.message) << '\n';
  }
}

void write_prices_dam_csv(std::ostream& os, const PowerSystem& system,
                          const std::vector<RunRecord>& records) {
  os << "point,framework,bus,period,price\n";
  for (const auto& rec : records) {
    const auto& periods = rec.report.dam.periods;
    for (std::size_t n = 0; n < rec.prices.dam.size(); ++n) {
      for (std::size_t t = 0; t < periods.size(); ++t) {
        os << csv_field(rec.point) << ',' << fw(rec.report) << ','
           << csv_field(system.buses()[n].id) << ',' << periods[t] << ','
           << format_number(rec.prices.dam[n][t]) << '\n';
      }
    }
  }
}

void write_prices_rt_csv(std::ostream& os, const PowerSystem& system,
                         const std::vector<RunRecord>& records) {
  os << "point,framework,scenario,bus,period,price\n";
  for (const auto& rec : records) {
    const auto& periods = rec.report.dam.periods;
    for (const auto& rt : rec.report.rtm.scenarios) {
      for (std::size_t n = 0; n < rt.price.size(); ++n) {
        for (std::size_t t = 0; t < periods.size(); ++t) {
          os << csv_field(rec.point) << ',' << fw(rec.report) << ','
             << csv_field(rt.scenario_id) << ',' << csv_field(system.buses()[n].id) << ','
             << periods[t] << ',' << format_number(rt.price[n][t]) << '\n';
        }
      }
    }
  }
}

void write_price_stats_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "point,framework,period,dam_node_std,rt_node_std,rt_scenario_std\n";
  for (const auto& rec : records) {
    const auto& periods = rec.report.dam.periods;
    for (std::size_t t = 0; t < periods.size(); ++t) {
      os << csv_field(rec.point) << ',' << fw(rec.report) << ',' << periods[t] << ','
         << format_number(rec.prices.dam_node_std[t]) << ','
         << format_number(rec.prices.rt_node_std[t]) << ','
         << format_number(rec.prices.rt_scenario_std[t]) << '\n';
    }
  }
}

void write_revenues_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "point,framework,participant,kind,dam_payment,dam_cost,dam_revenue,"
        "rt_settlement,total\n";
  for (const auto& rec : records) {
    for (const auto* group : {&rec.settlement.vres, &rec.settlement.units}) {
      for (const auto& p : *group) {
        os << csv_field(rec.point) << ',' << fw(rec.report) << ',' << csv_field(p.id) << ','
           << (p.vres ? "vres" : "conventional") << ',' << format_number(p.dam_payment)
           << ',' << format_number(p.dam_cost) << ',' << format_number(p.dam_revenue) << ','
           << format_number(p.rt_settlement) << ',' << format_number(p.total) << '\n';
      }
    }
  }
}

void write_uc_quality_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "point,framework,epsilon,da_fractional,da_total,da_fraction,rt_fractional,"
        "rt_total,rt_fraction,fraction,da_histogram,rt_histogram\n";
  for (const auto& rec : records) {
    const UcQualityReport& q = rec.uc;
    os << csv_field(rec.point) << ',' << fw(rec.report) << ',' << format_number(q.epsilon)
       << ',' << q.da_fractional << ',' << q.da_total << ',' << format_number(q.da_fraction)
       << ',' << q.rt_fractional << ',' << q.rt_total << ',' << format_number(q.rt_fraction)
       << ',' << format_number(q.fraction) << ',' << histogram(q.da_histogram) << ','
       << histogram(q.rt_histogram) << '\n';
  }
}

void write_out_of_sample_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "point,framework,test,cost\n";
  for (const auto& rec : records) {
    if (!rec.out_of_sample) continue;
    const OutOfSample& o = *rec.out_of_sample;
    for (std::size_t i = 0; i < o.costs.size(); ++i) {
      os << csv_field(rec.point) << ',' << fw(rec.report) << ',' << i << ','
         << format_number(o.costs[i]) << '\n';
    }
  }
}

namespace {

void write_out_of_sample_summary_csv(std::ostream& os,
                                     const std::vector<RunRecord>& records) {
  os << "point,framework,tests,mean,std\n";
  for (const auto& rec : records) {
    if (!rec.out_of_sample) continue;
    const OutOfSample& o = *rec.out_of_sample;
    os << csv_field(rec.point) << ',' << fw(rec.report) << ',' << o.costs.size() << ','
       << format_number(o.mean) << ',' << format_number(o.stddev) << '\n';
  }
}

nlohmann::json grid_json(const Grid& g) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : g) j.push_back(row);
  return j;
}

}  // namespace

nlohmann::json cost_report_to_json(const CostReport& r, const PowerSystem& system) {
  nlohmann::json j;
  j["framework"] = std::string(to_string(r.framework));
  j["total"] = r.total;
  j["dam_cost"] = r.dam_cost;
  j["expected_rt_cost"] = r.expected_rt_cost;
  j["cost_std"] = r.cost_std;
  nlohmann::json rt = nlohmann::json::object();
  for (std::size_t w = 0; w < r.rt_costs.size(); ++w) {
    const std::string id = w < r.rtm.scenarios.size() ? r.rtm.scenarios[w].scenario_id
                                                      : std::to_string(w);
    rt[id] = r.rt_costs[w];
  }
  j["rt_costs"] = rt;
  if (r.bids) {
    nlohmann::json b = nlohmann::json::object();
    for (std::size_t k = 0; k < system.num_vres() && k < r.bids->quantity.size(); ++k) {
      b[system.vres()[k].id] = r.bids->quantity[k];
    }
    j["bids"] = b;
  } else {
    j["bids"] = nullptr;
  }
  j["relaxed_objective"] =
      r.relaxed_objective ? nlohmann::json(*r.relaxed_objective) : nlohmann::json(nullptr);
  j["periods"] = r.dam.periods;
  j["dam_commitment"] = grid_json(r.dam.u);
  j["dam_output"] = grid_json(r.dam.p);
  return j;
}

nlohmann::json run_summary(const std::vector<RunRecord>& records,
                           const std::vector<FailureRecord>& failures,
                           const PowerSystem& system) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json j;
    j["point"] = rec.point;
    j["parameters"] = rec.parameters;
    j["report"] = cost_report_to_json(rec.report, system);
    j["uc_fraction"] = rec.uc.fraction;
    j["dam_surplus_residual"] = rec.settlement.dam_surplus_residual;
    if (rec.out_of_sample) {
      j["out_of_sample"] = {{"tests", rec.out_of_sample->costs.size()},
                            {"mean", rec.out_of_sample->mean},
                            {"std", rec.out_of_sample->stddev}};
    }
    runs.push_back(std::move(j));
  }
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& f : failures) {
    fails.push_back({{"point", f.point},
                     {"parameters", f.parameters},
                     {"framework", f.framework},
                     {"error", f.error},
                     {"message", f.message}});
  }
  return {{"runs", runs}, {"failures", fails}};
}

void write_reports(const std::filesystem::path& dir, const PowerSystem& system,
                   const std::vector<RunRecord>& records,
                   const std::vector<FailureRecord>& failures) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("costs.csv");
    write_costs_csv(f, records, failures);
  }
  {
    auto f = open("prices_dam.csv");
    write_prices_dam_csv(f, system, records);
  }
  {
    auto f = open("prices_rt.csv");
    write_prices_rt_csv(f, system, records);
  }
  {
    auto f = open("price_stats.csv");
    write_price_stats_csv(f, records);
  }
  {
    auto f = open("revenues.csv");
    write_revenues_csv(f, records);
  }
  {
    auto f = open("uc_quality.csv");
    write_uc_quality_csv(f, records);
  }
  {
    auto f = open("out_of_sample.csv");
    write_out_of_sample_csv(f, records);
  }
  {
    auto f = open("out_of_sample_summary.csv");
    write_out_of_sample_summary_csv(f, records);
  }
  {
    auto f = open("run_summary.json");
    f << run_summary(records, failures, system).dump(2) << '\n';
  }
}

}  // namespace vresbid
