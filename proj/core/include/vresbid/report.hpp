#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vresbid/bench.hpp"
#include "vresbid/dam.hpp"
#include "vresbid/rtm.hpp"
#include "vresbid/system.hpp"

namespace vresbid {

// Two-settlement cash flows of one participant. Conventional units are net of
// their own bid and re-dispatch costs; VRES revenue is gross.
struct ParticipantSettlement {
  std::string id;
  bool vres = false;
  double dam_payment = 0.0;  // sum_t price * scheduled output
  double dam_cost = 0.0;
  double dam_revenue = 0.0;    // payment - cost
  double rt_settlement = 0.0;  // probability-weighted
  std::vector<double> rt_by_scenario;
  double total = 0.0;  // dam_revenue + rt_settlement
};

struct SettlementReport {
  std::vector<ParticipantSettlement> vres;
  std::vector<ParticipantSettlement> units;
  double dam_load_payment = 0.0;
  double dam_congestion_rent = 0.0;
  // |load payment - participant payments - congestion rent|
  double dam_surplus_residual = 0.0;
};

// Deviations from the day-ahead schedule settle at the real-time bus price.
SettlementReport settle(const PowerSystem& system, const ScenarioSet& scenarios,
                        const DamSolution& dam, const RtmResults& rtm);

struct PriceTables {
  Grid dam;               // [bus][period]
  std::vector<Grid> rt;   // [scenario][bus][period]
  std::vector<double> dam_node_std;  // per period, across buses
  Grid rt_scenario_mean;             // [bus][period], weighted over scenarios
  std::vector<double> rt_node_std;   // per period, across buses of the mean
  Grid rt_node_mean;                 // [scenario][period], mean over buses
  std::vector<double> rt_scenario_std;  // per period, weighted across scenarios
};

PriceTables price_tables(const ScenarioSet& scenarios, const DamSolution& dam,
                         const RtmResults& rtm);

struct UcQualityReport {
  double epsilon = 1e-6;
  std::size_t da_fractional = 0, da_total = 0;
  std::size_t rt_fractional = 0, rt_total = 0;
  double da_fraction = 0.0;
  double rt_fraction = 0.0;
  double fraction = 0.0;  // pooled over day-ahead and real-time values
  // Ten equal buckets on [0, 1]; 1 falls in the last.
  std::vector<std::size_t> da_histogram, rt_histogram;
};

// Counts commitments strictly inside (epsilon, 1 - epsilon).
UcQualityReport uc_quality(const DamSolution& dam, const RtmResults& rtm,
                           double epsilon = 1e-6);

// One framework run at one sweep point.
struct RunRecord {
  std::string point;
  nlohmann::json parameters = nlohmann::json::object();
  CostReport report;
  SettlementReport settlement;
  PriceTables prices;
  UcQualityReport uc;
  std::optional<OutOfSample> out_of_sample;
};

RunRecord make_record(std::string point, nlohmann::json parameters,
                      const PowerSystem& system, const ScenarioSet& scenarios,
                      CostReport report);

// A framework run that raised an error.
struct FailureRecord {
  std::string point;
  nlohmann::json parameters = nlohmann::json::object();
  std::string framework;
  std::string error;
  std::string message;
};

// Fixed-precision number formatting shared by every table.
std::string format_number(double v);

void write_costs_csv(std::ostream& os, const std::vector<RunRecord>& records,
                     const std::vector<FailureRecord>& failures);
void write_prices_dam_csv(std::ostream& os, const PowerSystem& system,
                          const std::vector<RunRecord>& records);
void write_prices_rt_csv(std::ostream& os, const PowerSystem& system,
                         const std::vector<RunRecord>& records);
void write_price_stats_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_revenues_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_uc_quality_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_out_of_sample_csv(std::ostream& os, const std::vector<RunRecord>& records);

nlohmann::json cost_report_to_json(const CostReport& report,
                                   const PowerSystem& system);
nlohmann::json run_summary(const std::vector<RunRecord>& records,
                           const std::vector<FailureRecord>& failures,
                           const PowerSystem& system);

// Writes every table plus run_summary.json into `dir`, creating it.
// Bus labels come from `system`.
void write_reports(const std::filesystem::path& dir, const PowerSystem& system,
                   const std::vector<RunRecord>& records,
                   const std::vector<FailureRecord>& failures);

}  // namespace vresbid
