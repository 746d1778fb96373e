#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "synth/simulate.hpp"

namespace cea::pipeline {

enum class CostFamily { gaussian_identity, gamma_log };
enum class EstimatorKind { lmm, sur };

struct ThresholdGridConfig {
  double min = 0.0;
  double max = 50000.0;
  double step = 500.0;
  std::vector<double> always_include = {15000.0, 20000.0, 30000.0};
};

struct MiceConfig {
  size_t pmm_donors = 5;
  size_t cycles = 20;
  double ridge = 1e-4;
  size_t min_complete_rows = 10;
};

struct AnalysisConfig {
  std::optional<size_t> imputations;  // M override; default follows the incomplete-case rule
  size_t bootstrap_replicates = 1000;
  double primary_threshold = 15000.0;
  ThresholdGridConfig thresholds;
  CostFamily cost_family = CostFamily::gaussian_identity;
  bool include_early_decedents = true;
  EstimatorKind bootstrap_estimator = EstimatorKind::lmm;
  double resource_missing_threshold = 0.60;
  std::optional<std::set<std::string>> imputable_resources;  // restriction only
  MiceConfig mice;
};

struct RunConfig {
  // input paths
  std::string routine_csv;
  std::string crf_csv;
  std::string wards_csv;
  std::string valueset_csv;  // empty: built-in default tariff
  std::string unit_costs_json;
  std::string imputations_dir;  // optional: reuse a previous impute run

  std::string output_dir = "out";
  uint64_t seed = 1;
  size_t workers = 0;  // 0 = hardware parallelism
  bool strict_parsing = true;
  bool scenarios_enabled = true;

  AnalysisConfig analysis;
  synth::SimConfig simulate;
  bool has_simulate = false;

  std::string config_fingerprint;  // FNV-1a of the canonicalised config text
  std::string origin;              // file path or "<text>"

  size_t effective_workers() const;

  static RunConfig load_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text, const std::string& origin);

  // CLI-style overrides: seed, out, workers, serial, strict.
  void apply_override(const std::string& key, const std::string& value);
};

}  // namespace cea::pipeline
