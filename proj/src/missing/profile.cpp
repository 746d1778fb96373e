#include "missing/profile.hpp"

#include <algorithm>
#include <cmath>

#include "util/error.hpp"

namespace cea::missing {

using trial::Arm;
using trial::MergedDataset;
using trial::PatientRecord;

CellFlag ProvenanceMask::flag(size_t patient, const std::string& field) const {
  const auto& m = cells_.at(patient);
  auto it = m.find(field);
  return it == m.end() ? CellFlag::observed : it->second;
}

void ProvenanceMask::set(size_t patient, const std::string& field, CellFlag f) {
  if (f == CellFlag::observed) {
    cells_.at(patient).erase(field);
  } else {
    cells_.at(patient)[field] = f;
  }
}

std::vector<std::pair<size_t, std::string>> ProvenanceMask::cells_with(CellFlag f) const {
  std::vector<std::pair<size_t, std::string>> out;
  for (size_t i = 0; i < cells_.size(); ++i) {
    for (const auto& [field, flag] : cells_[i]) {
      if (flag == f) out.emplace_back(i, field);
    }
  }
  return out;
}

bool cell_eligible(const PatientRecord& p, size_t timepoint) {
  if (!p.death_day) return true;
  return trial::kTimepointDays[timepoint] < *p.death_day;
}

const VariableMissingness* MissingnessReport::find(const std::string& variable) const {
  for (const auto& v : variables) {
    if (v.variable == variable) return &v;
  }
  return nullptr;
}

namespace {

VariableMissingness make_var(std::string name, std::string group, size_t missing, size_t total) {
  VariableMissingness v;
  v.variable = std::move(name);
  v.group = std::move(group);
  v.missing = missing;
  v.total = total;
  v.percent = total == 0 ? 0.0 : 100.0 * static_cast<double>(missing) / static_cast<double>(total);
  return v;
}

}  // namespace

MissingnessReport profile_missingness(const MergedDataset& merged, double resource_threshold) {
  MissingnessReport rep;
  rep.n_patients = merged.patients.size();
  const size_t n = rep.n_patients;

  // Baseline block. Arm, age, sex and the ward descriptors other than the
  // baseline rate cannot be missing under the input schema; they are still
  // reported to make the zero explicit.
  size_t miss_ubase = 0, miss_rate = 0;
  for (const auto& p : merged.patients) {
    if (!p.utilities[0]) ++miss_ubase;
    if (!merged.ward_of(p).baseline_readm_rate_pct) ++miss_rate;
  }
  rep.variables.push_back(make_var("arm", "baseline", 0, n));
  rep.variables.push_back(make_var("age", "baseline", 0, n));
  rep.variables.push_back(make_var("sex", "baseline", 0, n));
  rep.variables.push_back(make_var("eq5d_baseline", "baseline", miss_ubase, n));
  rep.variables.push_back(make_var("ward_specialty", "baseline", 0, n));
  rep.variables.push_back(make_var("ward_baseline_readm_rate", "baseline", miss_rate, n));
  rep.variables.push_back(make_var("ward_pct_over_75", "baseline", 0, n));

  // Quality of life follow-ups.
  for (size_t t = 1; t < trial::kNumTimepoints; ++t) {
    size_t miss = 0;
    for (const auto& p : merged.patients) {
      if (cell_eligible(p, t) && !p.utilities[t]) ++miss;
    }
    rep.variables.push_back(
        make_var(std::string("eq5d_") + trial::kTimepointLabels[t], "quality_of_life", miss, n));
  }

  // Resources: the routine readmission count plus each CRF resource.
  {
    size_t miss = 0;
    for (const auto& p : merged.patients) {
      if (!p.readmissions_known && !p.hosp_cost) ++miss;
    }
    rep.variables.push_back(make_var(trial::kHospitalisationResource, "resource", miss, n));
  }
  for (const auto& name : trial::crf_resource_names()) {
    size_t miss = 0;
    bool any_column = false;
    for (const auto& p : merged.patients) {
      auto it = p.resources.find(name);
      if (it == p.resources.end()) continue;
      any_column = true;
      if (!it->second) ++miss;
    }
    if (any_column) rep.variables.push_back(make_var(name, "resource", miss, n));
  }

  // Per-arm EQ-5D missingness and response patterns.
  for (const auto& p : merged.patients) {
    const size_t a = p.arm == Arm::intervention ? 0 : 1;
    ++rep.n_by_arm[a];
    std::string pattern;
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      const bool missing = cell_eligible(p, t) && !p.utilities[t];
      if (missing) ++rep.eq5d_missing_by_arm[a][t];
      if (t > 0) pattern += missing ? 'M' : 'O';
    }
    ++rep.patterns.counts[pattern];
    const bool monotone = pattern.find("MO") == std::string::npos;
    ++(monotone ? rep.patterns.monotone : rep.patterns.non_monotone);
  }

  // Incomplete cases: missing any follow-up utility or any resource that
  // clears the imputability threshold.
  size_t incomplete = 0;
  std::set<std::string> counted_resources;
  for (const auto& v : rep.variables) {
    if (v.group == "resource" && v.percent < 100.0 * resource_threshold) counted_resources.insert(v.variable);
  }
  for (const auto& p : merged.patients) {
    bool inc = false;
    for (size_t t = 1; t < trial::kNumTimepoints && !inc; ++t) {
      if (cell_eligible(p, t) && !p.utilities[t]) inc = true;
    }
    if (!inc && counted_resources.count(trial::kHospitalisationResource) && !p.readmissions_known && !p.hosp_cost) {
      inc = true;
    }
    if (!inc) {
      for (const auto& [name, count] : p.resources) {
        if (!count && counted_resources.count(name)) {
          inc = true;
          break;
        }
      }
    }
    if (inc) ++incomplete;
  }
  rep.incomplete_case_percent = n == 0 ? 0.0 : 100.0 * static_cast<double>(incomplete) / static_cast<double>(n);
  return rep;
}

ResourceClassification classify_resources(const MissingnessReport& report, double threshold,
                                          const std::optional<std::set<std::string>>& requested) {
  ResourceClassification out;
  std::set<std::string> known;
  for (const auto& v : report.variables) {
    if (v.group != "resource") continue;
    known.insert(v.variable);
    if (v.percent < 100.0 * threshold) {
      out.imputable.insert(v.variable);
    } else {
      out.complete_case_only.insert(v.variable);
    }
  }
  if (requested) {
    for (const auto& name : *requested) {
      if (!known.count(name)) {
        throw validation_error("classify_resources: unknown resource name '" + name + "'");
      }
    }
    // The configuration can only narrow the imputable set, never promote a
    // resource past the threshold.
    for (auto it = out.imputable.begin(); it != out.imputable.end();) {
      if (!requested->count(*it)) {
        out.complete_case_only.insert(*it);
        it = out.imputable.erase(it);
      } else {
        ++it;
      }
    }
  }
  return out;
}

BaselineImputeResult impute_baseline_cluster_means(const MergedDataset& merged) {
  BaselineImputeResult out;
  out.dataset = merged;
  out.mask.resize(merged.patients.size());

  // Baseline utility: within-ward means pooled over arms.
  std::vector<double> ward_sum(merged.wards.size(), 0.0);
  std::vector<size_t> ward_n(merged.wards.size(), 0);
  double overall_sum = 0.0;
  size_t overall_n = 0;
  for (const auto& p : merged.patients) {
    if (p.utilities[0]) {
      ward_sum[p.ward_pos] += *p.utilities[0];
      ++ward_n[p.ward_pos];
      overall_sum += *p.utilities[0];
      ++overall_n;
    }
  }
  for (size_t i = 0; i < out.dataset.patients.size(); ++i) {
    auto& p = out.dataset.patients[i];
    if (p.utilities[0]) continue;
    double value;
    bool fallback = false;
    if (ward_n[p.ward_pos] > 0) {
      value = ward_sum[p.ward_pos] / static_cast<double>(ward_n[p.ward_pos]);
    } else if (overall_n > 0) {
      value = overall_sum / static_cast<double>(overall_n);
      fallback = true;
    } else {
      throw validation_error("baseline imputation: no observed baseline utility anywhere");
    }
    p.utilities[0] = value;
    out.mask.set(i, "u_base", CellFlag::imputed_baseline);
    out.log.push_back({p.id, "u_base", value, fallback});
  }

  // Ward baseline readmission rate: a ward-level value, so a missing ward can
  // only fall back to the overall (patient-weighted) mean.
  double rate_sum = 0.0;
  size_t rate_n = 0;
  for (const auto& p : merged.patients) {
    if (auto r = merged.ward_of(p).baseline_readm_rate_pct) {
      rate_sum += *r;
      ++rate_n;
    }
  }
  for (size_t w = 0; w < out.dataset.wards.size(); ++w) {
    auto& ward = out.dataset.wards[w];
    if (ward.baseline_readm_rate_pct) continue;
    if (rate_n == 0) throw validation_error("baseline imputation: no observed ward readmission rate anywhere");
    const double value = rate_sum / static_cast<double>(rate_n);
    ward.baseline_readm_rate_pct = value;
    for (size_t i = 0; i < out.dataset.patients.size(); ++i) {
      if (out.dataset.patients[i].ward_pos != w) continue;
      out.mask.set(i, "ward_readm_rate", CellFlag::imputed_baseline);
      out.log.push_back({out.dataset.patients[i].id, "ward_readm_rate", value, true});
    }
  }
  return out;
}

void apply_death_structural_zeros(MergedDataset& dataset, ProvenanceMask& mask) {
  for (size_t i = 0; i < dataset.patients.size(); ++i) {
    auto& p = dataset.patients[i];
    if (!p.death_day) continue;
    for (size_t t = 1; t < trial::kNumTimepoints; ++t) {
      if (!cell_eligible(p, t) && !p.utilities[t]) {
        p.utilities[t] = 0.0;
        mask.set(i, std::string("u") + trial::kTimepointLabels[t], CellFlag::structural_zero);
      }
    }
  }
}

size_t choose_imputation_count(const MissingnessReport& report, std::optional<size_t> override) {
  if (override) {
    if (*override < 2) throw validation_error("imputation count override must be at least 2");
    return *override;
  }
  const auto raw = static_cast<size_t>(std::ceil(report.incomplete_case_percent));
  return std::clamp<size_t>(raw, 5, 50);
}

}  // namespace cea::missing
