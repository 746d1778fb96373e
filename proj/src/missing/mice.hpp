#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "missing/profile.hpp"
#include "trial/types.hpp"

namespace cea::missing {

struct ImputationSpec {
  size_t pmm_donors = 5;       // predictive mean matching donor pool
  size_t cycles = 20;          // chained-equation sweeps per imputation
  double ridge = 1e-4;         // fallback penalty for collinear predictors
  size_t min_complete_rows = 10;
  std::set<std::string> imputable_resources;  // from classify_resources
};

struct SeedLedgerEntry {
  std::string arm;
  size_t imputation = 0;  // 1-based
  uint64_t seed = 0;
};

struct ImputedSets {
  size_t count = 0;  // M
  std::vector<trial::MergedDataset> datasets;
  // Provenance of every cell (baseline imputations, structural zeros and
  // chained-equation imputations); identical across the M datasets.
  ProvenanceMask mask;
  uint64_t master_seed = 0;
  std::vector<SeedLedgerEntry> seed_ledger;
  std::vector<std::string> log;  // ridge fallbacks and other notes
};

// Field-level access used by the imputation engine and the sensitivity
// rescaling: "u10"/"u30"/"u90" (index utilities), "hosp_cost", or a CRF
// resource name.
std::optional<double> get_field(const trial::PatientRecord& p, const std::string& field);
void set_field(trial::PatientRecord& p, const std::string& field, double value);

// Multiple imputation by chained equations, run separately per arm. The
// input must already have baseline values completed and post-death cells
// zeroed. Continuous variables (follow-up utilities, hospitalisation cost)
// use Bayesian linear regression with predictive mean matching; count
// variables (CRF resources) are modelled on the log1p scale, rounded and
// floored at zero. Predictors are the analysis covariates, ward indicators
// and all other analysis variables. Each (arm, imputation) pair owns an
// independent RNG stream derived from the master seed, so results do not
// depend on scheduling.
ImputedSets mice_by_arm(const trial::MergedDataset& prepared, const ProvenanceMask& prepared_mask, size_t m_count,
                        uint64_t master_seed, const ImputationSpec& spec, size_t workers = 1);

}  // namespace cea::missing
