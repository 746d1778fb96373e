#include "outcomes/costs.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "util/error.hpp"
#include "util/num.hpp"

namespace cea::outcomes {

using nlohmann::json;

UnitCostTable UnitCostTable::load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open unit cost file: " + path);
  return from_json_text(std::string(std::istreambuf_iterator<char>(in), {}), path);
}

UnitCostTable UnitCostTable::from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(origin + ": invalid JSON: " + e.what());
  }
  UnitCostTable t;
  try {
    t.currency_year = j.value("currency_year", 2022);
    for (auto& [k, v] : j.at("wages_per_minute").items()) t.wages_per_minute[k] = v.get<double>();
    for (auto& item : j.at("intervention_activity")) {
      t.intervention_activity.push_back({item.at("staff").get<std::string>(),
                                         item.at("incremental_minutes").get<double>()});
    }
    t.tariff_per_admission = j.at("tariffs").at("per_admission").get<double>();
    t.tariff_per_day = j.at("tariffs").at("per_day").get<double>();
    for (auto& [k, v] : j.at("resources").items()) t.resource_unit_costs[k] = v.get<double>();
  } catch (const json::exception& e) {
    throw validation_error(origin + ": unit cost schema error: " + e.what());
  }
  for (const auto& [k, v] : t.wages_per_minute) {
    if (v < 0.0) throw validation_error(origin + ": negative wage for staff '" + k + "'");
  }
  for (const auto& [k, v] : t.resource_unit_costs) {
    if (v < 0.0) throw validation_error(origin + ": negative unit cost for resource '" + k + "'");
  }
  if (t.tariff_per_admission < 0.0 || t.tariff_per_day < 0.0) {
    throw validation_error(origin + ": tariffs must be nonnegative");
  }
  return t;
}

double intervention_cost(const std::vector<ActivityItem>& activity, const UnitCostTable& costs, trial::Arm arm) {
  if (arm == trial::Arm::control) return 0.0;
  double total = 0.0;
  for (const auto& item : activity) {
    auto it = costs.wages_per_minute.find(item.staff);
    if (it == costs.wages_per_minute.end()) {
      throw validation_error("no wage configured for staff type '" + item.staff + "'");
    }
    total += item.incremental_minutes * it->second;
  }
  return total;
}

double hospitalisation_cost(const std::vector<trial::Readmission>& readmissions, const UnitCostTable& costs) {
  double total = 0.0;
  for (const auto& adm : readmissions) {
    if (adm.length_days < 0) throw validation_error("negative readmission length");
    total += costs.tariff_per_admission + adm.length_days * costs.tariff_per_day;
  }
  return total;
}

CostBreakdown total_cost(const trial::PatientRecord& patient, const std::set<std::string>& imputable_resources,
                         const UnitCostTable& costs) {
  CostBreakdown b;
  b.intervention_cost = intervention_cost(costs.intervention_activity, costs, patient.arm);
  if (patient.hosp_cost) {
    b.hospitalisation_cost = *patient.hosp_cost;
  } else if (patient.readmissions_known) {
    b.hospitalisation_cost = hospitalisation_cost(patient.readmissions, costs);
  } else {
    throw validation_error("total_cost: hospitalisation cost missing for patient '" + patient.id +
                           "' (dataset not completed)");
  }
  b.total = b.intervention_cost + b.hospitalisation_cost;
  for (const auto& [name, count] : patient.resources) {
    if (imputable_resources.count(name)) {
      if (!count) {
        throw validation_error("total_cost: resource '" + name + "' missing for patient '" + patient.id +
                               "' (dataset not completed)");
      }
      auto it = costs.resource_unit_costs.find(name);
      if (it == costs.resource_unit_costs.end()) {
        throw validation_error("no unit cost configured for resource '" + name + "'");
      }
      const double c = *count * it->second;
      b.other_resource_costs[name] = c;
      b.total += c;
    } else if (count) {
      b.excluded_resource_counts[name] = *count;
    }
  }
  return b;
}

ReadmissionSummary readmission_summary(const trial::MergedDataset& merged) {
  ReadmissionSummary s;
  std::vector<double> counts_int, counts_ctl;
  for (const auto& p : merged.patients) {
    if (!p.readmissions_known) continue;
    const auto k = p.readmissions.size();
    auto& hist = p.arm == trial::Arm::intervention ? s.counts_intervention : s.counts_control;
    if (hist.size() <= k) hist.resize(k + 1, 0);
    ++hist[k];
    (p.arm == trial::Arm::intervention ? counts_int : counts_ctl).push_back(static_cast<double>(k));
  }
  std::vector<double> all = counts_int;
  all.insert(all.end(), counts_ctl.begin(), counts_ctl.end());
  s.n_intervention = counts_int.size();
  s.n_control = counts_ctl.size();
  s.mean_intervention = mean(counts_int);
  s.sd_intervention = sample_sd(counts_int);
  s.mean_control = mean(counts_ctl);
  s.sd_control = sample_sd(counts_ctl);
  s.mean_total = mean(all);
  s.sd_total = sample_sd(all);
  return s;
}

std::vector<CompleteCaseRow> complete_case_resource_table(const trial::MergedDataset& merged,
                                                          const std::set<std::string>& excluded_resources) {
  std::vector<CompleteCaseRow> rows;
  for (const auto& name : trial::crf_resource_names()) {
    if (!excluded_resources.count(name)) continue;
    CompleteCaseRow row;
    row.resource = name;
    size_t users_int = 0, users_ctl = 0;
    for (const auto& p : merged.patients) {
      auto it = p.resources.find(name);
      if (it == p.resources.end() || !it->second) continue;
      const bool used = *it->second > 0.0;
      if (p.arm == trial::Arm::intervention) {
        ++row.n_intervention;
        users_int += used;
      } else {
        ++row.n_control;
        users_ctl += used;
      }
    }
    row.n_total = row.n_intervention + row.n_control;
    auto pct = [](size_t users, size_t n) {
      return n == 0 ? std::numeric_limits<double>::quiet_NaN() : 100.0 * static_cast<double>(users) / n;
    };
    row.pct_intervention = pct(users_int, row.n_intervention);
    row.pct_control = pct(users_ctl, row.n_control);
    row.pct_total = pct(users_int + users_ctl, row.n_total);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cea::outcomes
