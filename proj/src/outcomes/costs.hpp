#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "trial/types.hpp"

namespace cea::outcomes {

struct ActivityItem {
  std::string staff;
  double incremental_minutes = 0.0;
};

// All monetary inputs live here; everything is configuration-driven.
struct UnitCostTable {
  int currency_year = 2022;
  std::map<std::string, double> wages_per_minute;       // staff type -> GBP/min
  std::vector<ActivityItem> intervention_activity;      // incremental delivery time
  double tariff_per_admission = 0.0;                    // GBP per unplanned readmission
  double tariff_per_day = 0.0;                          // GBP per inpatient day
  std::map<std::string, double> resource_unit_costs;    // resource -> GBP per contact

  static UnitCostTable load_json(const std::string& path);
  static UnitCostTable from_json_text(const std::string& text, const std::string& origin);
};

struct CostBreakdown {
  double intervention_cost = 0.0;
  double hospitalisation_cost = 0.0;
  std::map<std::string, double> other_resource_costs;  // imputable resources only
  double total = 0.0;
  // Usage of excluded (complete-case only) resources, never summed into total.
  std::map<std::string, double> excluded_resource_counts;
};

// Incremental staffing cost of delivering the intervention; zero for the
// control arm.
double intervention_cost(const std::vector<ActivityItem>& activity, const UnitCostTable& costs, trial::Arm arm);

// Post-discharge readmission cost: per-admission tariff plus per-day tariff
// times length of stay. The index stay is not part of follow-up costs.
double hospitalisation_cost(const std::vector<trial::Readmission>& readmissions, const UnitCostTable& costs);

// Full per-patient breakdown on a completed record. Only resources named in
// `imputable_resources` enter the total; the rest are reported separately.
CostBreakdown total_cost(const trial::PatientRecord& patient, const std::set<std::string>& imputable_resources,
                         const UnitCostTable& costs);

struct ReadmissionSummary {
  // counts[k] = number of patients with exactly k readmissions
  std::vector<size_t> counts_intervention;
  std::vector<size_t> counts_control;
  double mean_intervention = 0.0, sd_intervention = 0.0;
  double mean_control = 0.0, sd_control = 0.0;
  double mean_total = 0.0, sd_total = 0.0;
  size_t n_intervention = 0, n_control = 0;  // patients with known readmission data
};

ReadmissionSummary readmission_summary(const trial::MergedDataset& merged);

struct CompleteCaseRow {
  std::string resource;
  size_t n_intervention = 0;    // respondents (observed cells)
  double pct_intervention = 0;  // share of respondents with any use; NaN if none
  size_t n_control = 0;
  double pct_control = 0;
  size_t n_total = 0;
  double pct_total = 0;
};

// Observed-only usage table for the resources excluded from the main
// analysis.
std::vector<CompleteCaseRow> complete_case_resource_table(const trial::MergedDataset& merged,
                                                          const std::set<std::string>& excluded_resources);

}  // namespace cea::outcomes
