#include "trial/parse.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "util/error.hpp"

namespace cea::trial {

namespace {

std::string at_line(const CsvTable& t, size_t row) {
  return t.origin() + ":" + std::to_string(t.line_number(row));
}

bool parse_flag(const CsvTable& t, size_t row, size_t col) {
  auto v = t.get_long(row, col);
  if (!v || (*v != 0 && *v != 1)) {
    throw validation_error(at_line(t, row) + ": column '" + t.header()[col] + "' must be 0 or 1");
  }
  return *v == 1;
}

// Timepoint column infix used by the CRF schema.
std::string tp_tag(size_t t) { return kTimepointLabels[t]; }

}  // namespace

const std::vector<std::string>& crf_resource_names() {
  static const std::vector<std::string> names = {
      "outpatient",    "daycase",    "ae",          "gp_surgery", "gp_home",    "gp_phone",
      "nurse_surgery", "nurse_home", "nurse_phone", "therapist",  "homecare",   "socialworker"};
  return names;
}

RoutineDataset parse_routine_csv(const std::string& path, bool strict) {
  return parse_routine(CsvTable::read_file(path), strict);
}

RoutineDataset parse_routine(const CsvTable& t, bool strict) {
  RoutineDataset out;
  const size_t c_id = t.column("patient_id");
  const size_t c_ward = t.column("ward_id");
  const size_t c_arm = t.column("arm");
  const size_t c_age = t.column("age");
  const size_t c_sex = t.column("sex_male");
  const size_t c_death = t.column("death_day");
  const size_t c_stay = t.column("index_stay_days");
  const auto c_readm_missing = t.find_column("readm_missing");

  // Readmission pairs readm_start_k / readm_len_k are discovered from the header.
  std::vector<std::pair<size_t, size_t>> readm_cols;
  for (size_t k = 1;; ++k) {
    auto cs = t.find_column("readm_start_" + std::to_string(k));
    auto cl = t.find_column("readm_len_" + std::to_string(k));
    if (!cs && !cl) break;
    if (!cs || !cl) {
      throw validation_error(t.origin() + ": readm_start_" + std::to_string(k) + " and readm_len_" +
                             std::to_string(k) + " must both be present");
    }
    readm_cols.emplace_back(*cs, *cl);
  }

  std::unordered_set<std::string> seen;
  for (size_t r = 0; r < t.rows(); ++r) {
    try {
      PatientRecord p;
      p.id = t.cell(r, c_id);
      if (p.id.empty()) throw validation_error(at_line(t, r) + ": blank patient_id");
      if (!seen.insert(p.id).second) {
        // Duplicates are an integrity problem, not a malformed row; always fatal.
        throw validation_error(t.origin() + ": duplicate patient_id '" + p.id + "'");
      }
      p.ward_id = t.cell(r, c_ward);
      if (p.ward_id.empty()) throw validation_error(at_line(t, r) + ": blank ward_id");
      p.arm = parse_flag(t, r, c_arm) ? Arm::intervention : Arm::control;
      auto age = t.get_double(r, c_age);
      if (!age || *age < 0.0) throw validation_error(at_line(t, r) + ": invalid age");
      p.age = *age;
      p.male = parse_flag(t, r, c_sex);
      if (auto d = t.get_long(r, c_death)) {
        if (*d < 0 || *d > 90) {
          throw validation_error(at_line(t, r) + ": death_day must be in [0, 90], got " + std::to_string(*d));
        }
        p.death_day = static_cast<int>(*d);
      }
      p.index_stay_days = t.get_double(r, c_stay);
      if (p.index_stay_days && *p.index_stay_days < 0.0) {
        throw validation_error(at_line(t, r) + ": index_stay_days must be nonnegative");
      }
      if (c_readm_missing && !t.is_blank(r, *c_readm_missing)) {
        p.readmissions_known = !parse_flag(t, r, *c_readm_missing);
      }
      for (auto [cs, cl] : readm_cols) {
        const bool has_start = !t.is_blank(r, cs);
        const bool has_len = !t.is_blank(r, cl);
        if (!has_start && !has_len) continue;
        if (has_start != has_len) {
          throw validation_error(at_line(t, r) + ": readmission start/length pair incomplete");
        }
        Readmission adm;
        adm.start_day = static_cast<int>(*t.get_long(r, cs));
        adm.length_days = static_cast<int>(*t.get_long(r, cl));
        if (adm.start_day < 0 || adm.start_day > 90) {
          throw validation_error(at_line(t, r) + ": readmission start_day must be in [0, 90]");
        }
        if (adm.length_days < 0) {
          throw validation_error(at_line(t, r) + ": readmission length_days must be nonnegative");
        }
        p.readmissions.push_back(adm);
      }
      if (!p.readmissions_known && !p.readmissions.empty()) {
        throw validation_error(at_line(t, r) + ": readm_missing=1 row also lists readmissions");
      }
      out.records.push_back(std::move(p));
    } catch (const Error& e) {
      if (strict) throw;
      out.issues.push_back({t.line_number(r), e.what()});
      seen.erase(t.cell(r, c_id));  // a later well-formed row with this id may stand
    }
  }
  return out;
}

CrfDataset parse_crf_csv(const std::string& path, bool strict) {
  return parse_crf(CsvTable::read_file(path), strict);
}

CrfDataset parse_crf(const CsvTable& t, bool strict) {
  CrfDataset out;
  const size_t c_id = t.column("patient_id");

  std::array<std::array<size_t, 5>, kNumTimepoints> dim_cols{};
  for (size_t tp = 0; tp < kNumTimepoints; ++tp) {
    for (size_t d = 0; d < 5; ++d) {
      dim_cols[tp][d] = t.column("eq5d_" + tp_tag(tp) + "_" + kEq5dDims[d]);
    }
  }
  std::array<std::optional<size_t>, kNumTimepoints> index_cols;
  for (size_t tp = 0; tp < kNumTimepoints; ++tp) {
    index_cols[tp] = t.find_column("eq5d_" + tp_tag(tp) + "_index");
  }
  std::vector<std::pair<std::string, size_t>> resource_cols;
  for (const auto& name : crf_resource_names()) {
    if (auto c = t.find_column(name)) resource_cols.emplace_back(name, *c);
  }

  // Anything beyond the known schema is rejected so typos cannot silently
  // drop a resource from the analysis.
  {
    std::set<std::string> known = {"patient_id"};
    for (size_t tp = 0; tp < kNumTimepoints; ++tp) {
      for (size_t d = 0; d < 5; ++d) known.insert("eq5d_" + tp_tag(tp) + "_" + kEq5dDims[d]);
      known.insert("eq5d_" + tp_tag(tp) + "_index");
    }
    for (const auto& name : crf_resource_names()) known.insert(name);
    for (const auto& col : t.header()) {
      if (!known.count(col)) {
        throw validation_error(t.origin() + ": unknown column '" + col + "' in CRF schema");
      }
    }
  }

  std::unordered_set<std::string> seen;
  for (size_t r = 0; r < t.rows(); ++r) {
    try {
      CrfRecord rec;
      rec.patient_id = t.cell(r, c_id);
      if (rec.patient_id.empty()) throw validation_error(at_line(t, r) + ": blank patient_id");
      if (!seen.insert(rec.patient_id).second) {
        throw validation_error(t.origin() + ": duplicate patient_id '" + rec.patient_id + "'");
      }
      for (size_t tp = 0; tp < kNumTimepoints; ++tp) {
        Eq5dProfile prof;
        int present = 0;
        for (size_t d = 0; d < 5; ++d) {
          auto v = t.get_long(r, dim_cols[tp][d]);
          if (!v) continue;
          if (*v < 1 || *v > 5) {
            throw validation_error(at_line(t, r) + ": EQ-5D level must be 1-5, got " + std::to_string(*v) +
                                   " (column '" + t.header()[dim_cols[tp][d]] + "')");
          }
          prof.levels[d] = static_cast<int>(*v);
          ++present;
        }
        if (present == 5) {
          rec.profiles[tp] = prof;
        } else if (present != 0) {
          // Incomplete descriptive profile: index not computable, record stays missing.
          out.issues.push_back({t.line_number(r), "incomplete EQ-5D profile at timepoint " + std::string(tp_tag(tp)) +
                                                      " for patient " + rec.patient_id + "; treated as missing"});
        }
        if (index_cols[tp]) {
          auto u = t.get_double(r, *index_cols[tp]);
          if (u) {
            if (*u > 1.0) {
              throw validation_error(at_line(t, r) + ": EQ-5D index utility must be <= 1, got " +
                                     std::to_string(*u));
            }
            rec.utilities[tp] = *u;
          }
        }
      }
      for (const auto& [name, col] : resource_cols) {
        auto v = t.get_double(r, col);
        if (v && *v < 0.0) {
          throw validation_error(at_line(t, r) + ": resource count '" + name + "' must be nonnegative");
        }
        rec.resources[name] = v;  // blank stays missing, never coerced to zero
      }
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      if (strict) throw;
      out.issues.push_back({t.line_number(r), e.what()});
      seen.erase(t.cell(r, c_id));
    }
  }
  return out;
}

WardTable parse_wards_csv(const std::string& path, bool strict) {
  return parse_wards(CsvTable::read_file(path), strict);
}

WardTable parse_wards(const CsvTable& t, bool strict) {
  WardTable out;
  const size_t c_id = t.column("ward_id");
  const size_t c_spec = t.column("specialty_elderly");
  const size_t c_rate = t.column("baseline_readm_rate_pct");
  const size_t c_p75 = t.column("pct_over_75");

  std::unordered_set<std::string> seen;
  for (size_t r = 0; r < t.rows(); ++r) {
    try {
      WardInfo w;
      w.id = t.cell(r, c_id);
      if (w.id.empty()) throw validation_error(at_line(t, r) + ": blank ward_id");
      if (!seen.insert(w.id).second) {
        throw validation_error(t.origin() + ": duplicate ward_id '" + w.id + "'");
      }
      w.specialty_elderly = parse_flag(t, r, c_spec);
      if (auto rate = t.get_double(r, c_rate)) {
        if (*rate < 0.0 || *rate > 100.0) {
          throw validation_error(at_line(t, r) + ": baseline_readm_rate_pct must be in [0, 100]");
        }
        w.baseline_readm_rate_pct = *rate;
      }
      auto p75 = t.get_double(r, c_p75);
      if (!p75 || *p75 < 0.0 || *p75 > 100.0) {
        throw validation_error(at_line(t, r) + ": pct_over_75 must be in [0, 100]");
      }
      w.pct_over_75 = *p75;
      out.wards.push_back(std::move(w));
    } catch (const Error& e) {
      if (strict) throw;
      out.issues.push_back({t.line_number(r), e.what()});
      seen.erase(t.cell(r, c_id));
    }
  }
  return out;
}

}  // namespace cea::trial
