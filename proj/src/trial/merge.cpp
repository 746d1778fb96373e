#include "trial/merge.hpp"

#include <algorithm>
#include <unordered_map>

#include "util/error.hpp"
#include "util/num.hpp"

namespace cea::trial {

namespace {

bool early_decedent(const PatientRecord& p) {
  return p.death_day && *p.death_day <= 30 && p.readmissions_known && p.readmissions.empty();
}

}  // namespace

size_t MergedDataset::count_arm(Arm a) const {
  return static_cast<size_t>(
      std::count_if(patients.begin(), patients.end(), [a](const PatientRecord& p) { return p.arm == a; }));
}

MergeResult merge_datasets(const RoutineDataset& routine, const CrfDataset& crf, const WardTable& wards,
                           const MergeOptions& opts) {
  MergeResult out;
  out.report.routine_count = routine.records.size();
  out.report.crf_count = crf.records.size();

  std::unordered_map<std::string, const CrfRecord*> crf_by_id;
  for (const auto& rec : crf.records) crf_by_id.emplace(rec.patient_id, &rec);

  std::unordered_map<std::string, const WardInfo*> wards_by_id;
  for (const auto& w : wards.wards) wards_by_id.emplace(w.id, &w);

  std::unordered_map<std::string, size_t> ward_pos;  // assigned in first-seen order

  std::unordered_map<std::string, bool> crf_matched;
  for (const auto& rec : crf.records) crf_matched[rec.patient_id] = false;

  for (const auto& r : routine.records) {
    auto it = crf_by_id.find(r.id);
    if (it == crf_by_id.end()) {
      out.report.unmatched_routine_ids.push_back(r.id);
      continue;
    }
    crf_matched[r.id] = true;

    PatientRecord p = r;
    p.profiles = it->second->profiles;
    p.utilities = it->second->utilities;
    p.resources = it->second->resources;

    if (early_decedent(p)) {
      if (!opts.include_early_decedents) {
        ++out.report.decedents_dropped;
        continue;
      }
      ++out.report.decedents_retained;
    }

    auto wit = wards_by_id.find(p.ward_id);
    if (wit == wards_by_id.end()) {
      throw validation_error("merge: patient '" + p.id + "' references unknown ward '" + p.ward_id + "'");
    }
    auto [pos_it, inserted] = ward_pos.emplace(p.ward_id, out.dataset.wards.size());
    if (inserted) out.dataset.wards.push_back(*wit->second);
    p.ward_pos = pos_it->second;

    out.dataset.patients.push_back(std::move(p));
  }

  for (const auto& rec : crf.records) {
    if (!crf_matched[rec.patient_id]) out.report.unmatched_crf_ids.push_back(rec.patient_id);
  }
  std::sort(out.report.unmatched_routine_ids.begin(), out.report.unmatched_routine_ids.end());
  std::sort(out.report.unmatched_crf_ids.begin(), out.report.unmatched_crf_ids.end());

  out.report.merged_count = out.dataset.patients.size();
  out.report.ward_count = out.dataset.wards.size();

  if (out.dataset.patients.empty()) {
    throw validation_error("merge: no patient appears in both the routine and CRF datasets");
  }
  if (out.dataset.count_arm(Arm::intervention) == 0 || out.dataset.count_arm(Arm::control) == 0) {
    throw validation_error("merge: one trial arm is empty after merging");
  }
  return out;
}

namespace {

struct ArmValues {
  std::vector<double> intervention;
  std::vector<double> control;

  std::vector<double> all() const {
    std::vector<double> v = intervention;
    v.insert(v.end(), control.begin(), control.end());
    return v;
  }
};

template <typename F>
ArmValues collect(const MergedDataset& m, F getter) {
  ArmValues out;
  for (const auto& p : m.patients) {
    auto v = getter(p);
    if (!v) continue;
    (p.arm == Arm::intervention ? out.intervention : out.control).push_back(*v);
  }
  return out;
}

BaselineRow make_row(const std::string& name, bool binary, const ArmValues& vals) {
  BaselineRow row;
  row.variable = name;
  row.binary = binary;
  const double scale = binary ? 100.0 : 1.0;
  auto tot = vals.all();
  row.mean_intervention = scale * mean(vals.intervention);
  row.sd_intervention = scale * sample_sd(vals.intervention);
  row.mean_control = scale * mean(vals.control);
  row.sd_control = scale * sample_sd(vals.control);
  row.mean_total = scale * mean(tot);
  row.sd_total = scale * sample_sd(tot);
  const TwoSampleTest test =
      binary ? two_proportion_z_test(vals.intervention, vals.control) : welch_t_test(vals.intervention, vals.control);
  row.p_value = test.p_value;
  row.p_defined = test.defined;
  return row;
}

}  // namespace

BaselineTable baseline_summary(const MergedDataset& merged) {
  if (merged.patients.empty()) throw validation_error("baseline_summary: empty dataset");

  BaselineTable table;
  table.n_intervention = merged.count_arm(Arm::intervention);
  table.n_control = merged.count_arm(Arm::control);
  for (size_t w = 0; w < merged.wards.size(); ++w) {
    bool any_int = false, any_ctl = false;
    for (const auto& p : merged.patients) {
      if (p.ward_pos != w) continue;
      (p.arm == Arm::intervention ? any_int : any_ctl) = true;
    }
    if (any_int) ++table.wards_intervention;
    if (any_ctl) ++table.wards_control;
  }

  auto opt = [](double v) { return std::optional<double>(v); };
  table.rows.push_back(make_row(
      "age", false, collect(merged, [&](const PatientRecord& p) { return opt(p.age); })));
  table.rows.push_back(make_row(
      "sex_male_pct", true, collect(merged, [&](const PatientRecord& p) { return opt(p.male ? 1.0 : 0.0); })));
  table.rows.push_back(make_row(
      "eq5d_baseline", false, collect(merged, [&](const PatientRecord& p) { return p.utilities[0]; })));
  table.rows.push_back(make_row(
      "ward_baseline_readm_rate_pct", false,
      collect(merged, [&](const PatientRecord& p) { return merged.ward_of(p).baseline_readm_rate_pct; })));
  table.rows.push_back(make_row(
      "ward_pct_over_75", false,
      collect(merged, [&](const PatientRecord& p) { return opt(merged.ward_of(p).pct_over_75); })));
  table.rows.push_back(make_row(
      "ward_specialty_elderly_pct", true,
      collect(merged, [&](const PatientRecord& p) { return opt(merged.ward_of(p).specialty_elderly ? 1.0 : 0.0); })));
  return table;
}

}  // namespace cea::trial
