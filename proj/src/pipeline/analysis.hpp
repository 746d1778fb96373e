#pragma once

#include <optional>
#include <set>

#include "decision/metrics.hpp"
#include "decision/scenarios.hpp"
#include "estimation/design.hpp"
#include "missing/mice.hpp"
#include "outcomes/costs.hpp"
#include "pipeline/config.hpp"
#include "uncertainty/bootstrap.hpp"
#include "uncertainty/ceac.hpp"
#include "uncertainty/rubin.hpp"

namespace cea::pipeline {

// Flatten one completed dataset into model rows: per-patient QALY (area
// under the utility curve with death handling) and total cost under the
// resource classification.
std::vector<estimation::AnalysisRow> analysis_rows(const trial::MergedDataset& completed,
                                                   const outcomes::UnitCostTable& costs,
                                                   const std::set<std::string>& imputable_resources);

struct EndpointPooled {
  double adj_mean_control = 0.0;       // pooled (mean over imputations)
  double adj_mean_intervention = 0.0;
  uncertainty::PooledEstimate difference;
};

struct EstimatorPooled {
  EndpointPooled cost;
  EndpointPooled qaly;
};

struct ThresholdMetrics {
  double lambda = 0.0;
  double nhb = 0.0;
  double nmb = 0.0;
  double prob_ce = 0.0;       // from the pooled bootstrap cloud
  double nhb_ci_lower = 0.0;  // percentile interval over the cloud
  double nhb_ci_upper = 0.0;
};

struct AnalysisResult {
  int scenario_id = 1;
  size_t m = 0;
  size_t b = 0;
  EstimatorPooled lmm;  // hierarchical (ward random-intercept) models
  EstimatorPooled sur;  // seemingly unrelated regressions, cluster-robust
  decision::IcerResult icer_lmm;
  decision::IcerResult icer_sur;
  std::vector<ThresholdMetrics> thresholds;  // primary + named thresholds
  uncertainty::CeCloud cloud;
  uncertainty::Ceac ceac;
  // MICE chain notes carried through for reporting.
  std::vector<std::string> notes;
};

// Fit both estimators on every imputed dataset, pool by Rubin's rules, run
// the within-imputation cluster bootstrap, pool the clouds, and derive the
// decision metrics. `scenario_id` keys the bootstrap seed streams; the base
// case is scenario 1.
AnalysisResult analyze_imputed(const missing::ImputedSets& imputed, const AnalysisConfig& cfg,
                               const outcomes::UnitCostTable& costs, const std::set<std::string>& imputable_resources,
                               uint64_t master_seed, int scenario_id, size_t workers);

struct ScenarioResult {
  decision::MnarScenario scenario;
  AnalysisResult analysis;
};

// The seven-scenario sensitivity sweep: rescale, re-estimate, re-pool.
std::vector<ScenarioResult> run_scenarios(const missing::ImputedSets& imputed, const AnalysisConfig& cfg,
                                          const outcomes::UnitCostTable& costs,
                                          const std::set<std::string>& imputable_resources, uint64_t master_seed,
                                          size_t workers);

// Flat CSV serialisation of a (possibly completed) dataset; ward attributes
// are carried on each row so a file round-trips without the ward table.
std::string dataset_to_csv(const trial::MergedDataset& dataset);
trial::MergedDataset dataset_from_csv(const std::string& text, const std::string& origin);

// Imputation directory: imputation_###.csv plus mask.json with provenance,
// seeds and chain notes.
void write_imputations(const missing::ImputedSets& sets, const std::string& dir);
missing::ImputedSets load_imputations(const std::string& dir);

}  // namespace cea::pipeline
