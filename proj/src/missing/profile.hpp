#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trial/types.hpp"

namespace cea::missing {

// Cell provenance, tracked per patient and field. Fields are named
// "u_base", "u10", "u30", "u90", "hosp_cost", "ward_readm_rate" and the CRF
// resource names.
enum class CellFlag { observed, imputed_baseline, imputed_mi, structural_zero };

class ProvenanceMask {
public:
  void resize(size_t n_patients) { cells_.resize(n_patients); }
  size_t patients() const { return cells_.size(); }

  CellFlag flag(size_t patient, const std::string& field) const;
  void set(size_t patient, const std::string& field, CellFlag f);

  // All (patient, field) pairs carrying the given flag, in deterministic order.
  std::vector<std::pair<size_t, std::string>> cells_with(CellFlag f) const;

  bool operator==(const ProvenanceMask&) const = default;

private:
  std::vector<std::map<std::string, CellFlag>> cells_;
};

struct VariableMissingness {
  std::string variable;
  std::string group;  // baseline | quality_of_life | resource
  size_t missing = 0;
  size_t total = 0;
  double percent = 0.0;
};

struct PatternSummary {
  // Pattern over the 10/30/90-day measurements, 'O' observed / 'M' missing.
  std::map<std::string, size_t> counts;
  size_t monotone = 0;      // missingness, once started, persists
  size_t non_monotone = 0;  // an observed value follows a missing one
};

struct MissingnessReport {
  size_t n_patients = 0;
  std::vector<VariableMissingness> variables;
  // EQ-5D missingness split by arm, all four timepoints: [arm][timepoint].
  std::array<std::array<size_t, trial::kNumTimepoints>, 2> eq5d_missing_by_arm{};
  std::array<size_t, 2> n_by_arm{};
  PatternSummary patterns;
  // Share of patients missing at least one analysis variable (EQ-5D
  // follow-ups and the resources that clear the imputability threshold).
  double incomplete_case_percent = 0.0;

  const VariableMissingness* find(const std::string& variable) const;
};

// A measurement cell exists only while the patient is alive; post-death
// timepoints are zero by construction, not missing.
bool cell_eligible(const trial::PatientRecord& p, size_t timepoint);

MissingnessReport profile_missingness(const trial::MergedDataset& merged, double resource_threshold = 0.60);

struct ResourceClassification {
  std::set<std::string> imputable;
  std::set<std::string> complete_case_only;
};

// Partition of the resource variables by the missingness rule: strictly below
// the threshold enters the main analysis, everything else is reported
// complete-case only. `requested` (optional) restricts the imputable set and
// must name known resources.
ResourceClassification classify_resources(const MissingnessReport& report, double threshold = 0.60,
                                          const std::optional<std::set<std::string>>& requested = std::nullopt);

struct BaselineImputeEntry {
  std::string patient_id;
  std::string field;
  double value = 0.0;
  bool overall_fallback = false;  // ward had no observed values
};

struct BaselineImputeResult {
  trial::MergedDataset dataset;
  ProvenanceMask mask;
  std::vector<BaselineImputeEntry> log;
};

// Within-ward mean imputation for baseline variables (baseline EQ-5D and the
// ward baseline readmission rate), pooling both arms; wards with no observed
// value fall back to the overall mean, which is logged.
BaselineImputeResult impute_baseline_cluster_means(const trial::MergedDataset& merged);

// Fill post-death measurement cells with zeros (flagged structural, never
// imputed or rescaled).
void apply_death_structural_zeros(trial::MergedDataset& dataset, ProvenanceMask& mask);

// Number of imputed datasets: the incomplete-case percentage, rounded up and
// clamped to [5, 50]; a configuration override wins when provided.
size_t choose_imputation_count(const MissingnessReport& report, std::optional<size_t> override = std::nullopt);

}  // namespace cea::missing
