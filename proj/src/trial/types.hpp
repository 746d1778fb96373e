#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cea::trial {

enum class Arm { control = 0, intervention = 1 };

inline const char* arm_name(Arm a) { return a == Arm::intervention ? "intervention" : "control"; }

// Measurement schedule in days post-discharge.
inline constexpr std::array<int, 4> kTimepointDays = {0, 10, 30, 90};
inline constexpr size_t kNumTimepoints = 4;
inline constexpr std::array<const char*, 4> kTimepointLabels = {"base", "10", "30", "90"};

// EQ-5D descriptive system: mobility, self-care, usual activities,
// pain/discomfort, anxiety/depression; five levels each.
inline constexpr std::array<const char*, 5> kEq5dDims = {"mo", "sc", "ua", "pd", "ad"};

struct Eq5dProfile {
  std::array<int, 5> levels{1, 1, 1, 1, 1};
  bool operator==(const Eq5dProfile&) const = default;
};

struct Readmission {
  int start_day = 0;
  int length_days = 0;
  bool operator==(const Readmission&) const = default;
};

// Canonical CRF resource-use variables, in file order.
const std::vector<std::string>& crf_resource_names();
// Derived routine resource (readmission count); participates in the
// missingness classification together with the CRF resources.
inline constexpr const char* kHospitalisationResource = "hospitalisation";

struct PatientRecord {
  std::string id;
  std::string ward_id;
  Arm arm = Arm::control;
  double age = 0.0;
  bool male = false;
  std::optional<int> death_day;          // days post-discharge, 0..90
  std::optional<double> index_stay_days;
  bool readmissions_known = true;        // false: readmission data unusable
  std::vector<Readmission> readmissions;
  std::array<std::optional<Eq5dProfile>, kNumTimepoints> profiles;
  std::array<std::optional<double>, kNumTimepoints> utilities;  // index scale, <= 1
  std::map<std::string, std::optional<double>> resources;      // CRF counts
  std::optional<double> hosp_cost;       // priced readmission cost, GBP
  size_t ward_pos = 0;                   // index into MergedDataset::wards

  bool operator==(const PatientRecord&) const = default;
};

struct WardInfo {
  std::string id;
  bool specialty_elderly = false;
  std::optional<double> baseline_readm_rate_pct;  // may be missing at baseline
  double pct_over_75 = 0.0;

  bool operator==(const WardInfo&) const = default;
};

struct ParseIssue {
  size_t line = 0;
  std::string message;
};

struct RoutineDataset {
  std::vector<PatientRecord> records;
  std::vector<ParseIssue> issues;  // lenient mode: skipped rows, one entry each
};

struct CrfRecord {
  std::string patient_id;
  std::array<std::optional<Eq5dProfile>, kNumTimepoints> profiles;
  std::array<std::optional<double>, kNumTimepoints> utilities;
  std::map<std::string, std::optional<double>> resources;
};

struct CrfDataset {
  std::vector<CrfRecord> records;
  std::vector<ParseIssue> issues;
};

struct WardTable {
  std::vector<WardInfo> wards;
  std::vector<ParseIssue> issues;
};

struct MergedDataset {
  std::vector<PatientRecord> patients;
  std::vector<WardInfo> wards;

  const WardInfo& ward_of(const PatientRecord& p) const { return wards[p.ward_pos]; }
  size_t count_arm(Arm a) const;

  bool operator==(const MergedDataset&) const = default;
};

struct JoinReport {
  size_t routine_count = 0;
  size_t crf_count = 0;
  size_t merged_count = 0;
  size_t ward_count = 0;
  size_t decedents_retained = 0;   // died within 30 days, no readmission
  size_t decedents_dropped = 0;    // only when the replication flag is set
  std::vector<std::string> unmatched_routine_ids;
  std::vector<std::string> unmatched_crf_ids;
};

struct MergeOptions {
  // When false, patients who died within 30 days without a readmission are
  // dropped, replicating the primary clinical cohort.
  bool include_early_decedents = true;
};

struct MergeResult {
  MergedDataset dataset;
  JoinReport report;
};

struct BaselineRow {
  std::string variable;
  bool binary = false;  // binary rows are reported as percent
  double mean_intervention = 0.0, sd_intervention = 0.0;
  double mean_control = 0.0, sd_control = 0.0;
  double mean_total = 0.0, sd_total = 0.0;
  double p_value = 1.0;
  bool p_defined = true;
};

struct BaselineTable {
  size_t n_intervention = 0, n_control = 0;
  size_t wards_intervention = 0, wards_control = 0;
  std::vector<BaselineRow> rows;
};

}  // namespace cea::trial
