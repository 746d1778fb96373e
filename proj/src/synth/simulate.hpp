#pragma once

#include <cstdint>
#include <vector>

#include "trial/types.hpp"

namespace cea::synth {

enum class Mechanism { mcar, mar, mnar };

struct MissingnessConfig {
  Mechanism mechanism = Mechanism::mcar;
  double mcar_p = 0.0;          // per-cell deletion probability (MCAR)
  double target_rate = 0.3;     // marginal deletion rate for MAR/MNAR
  double coef_baseline_utility = 0.0;
  double coef_sex = 0.0;
  double coef_arm = 0.0;
  double coef_value = 0.0;      // MNAR only: weight on the value being deleted
  double resource_mcar_p = 0.0; // MCAR deletion of simulated resource counts
};

struct SimConfig {
  size_t wards_per_arm = 20;
  size_t patients_per_ward_min = 15;
  size_t patients_per_ward_max = 15;

  double true_delta_cost = -250.0;  // via the admission rate, priced at the tariffs below
  double true_delta_qaly = 0.006;   // via a constant follow-up utility shift

  double admission_rate = 0.4;      // control-arm marginal mean readmission count
  double mean_los_days = 3.0;       // mean readmission length (Poisson)
  double ward_sd_cost = 0.2;        // ward frailty SD on the log admission rate
  double tariff_per_admission = 1500.0;
  double tariff_per_day = 350.0;

  double baseline_utility_mean = 0.5;
  double ward_sd_utility = 0.05;    // ward intercept SD
  double patient_sd_utility = 0.12; // patient intercept SD
  double resid_sd_utility = 0.08;   // AR(1) innovation SD across timepoints
  double ar1_rho = 0.6;

  double death_probability = 0.0;   // per patient; death day uniform on 1..90

  double resource_rate = 0.0;       // simulated 'outpatient' count rate; 0 = off
  double resource_unit_cost = 50.0;

  MissingnessConfig missingness;
  uint64_t seed = 1;
};

struct GroundTruth {
  double delta_cost = 0.0;   // configured population effect
  double delta_qaly = 0.0;
  double nhb_15000 = 0.0;
  double sample_delta_cost = 0.0;  // realised latent-data contrasts
  double sample_delta_qaly = 0.0;
};

struct SimulatedTrial {
  trial::MergedDataset complete;  // latent data before any deletion
  GroundTruth truth;
};

// Draw a complete cluster-randomised trial: ward frailties, patient utility
// trajectories with an AR(1) structure and a constant follow-up treatment
// shift, and readmission counts from a log-link Poisson with ward frailty.
// The configured effects are exact population contrasts under the same
// tariffs. Deterministic given the seed.
SimulatedTrial generate_trial(const SimConfig& cfg);

struct DeletionResult {
  trial::MergedDataset dataset;
  std::vector<std::pair<size_t, std::string>> deleted;  // (patient index, field)
};

// Punch holes into a complete dataset. MCAR deletes cells independently;
// MAR's logit uses observed covariates only; MNAR adds the value itself.
// The intercept is calibrated so the marginal rate matches target_rate.
DeletionResult apply_missingness(const trial::MergedDataset& complete, const MissingnessConfig& cfg, uint64_t seed);

// Serialise a dataset back into the three input files.
void write_trial_csvs(const trial::MergedDataset& dataset, const std::string& routine_path,
                      const std::string& crf_path, const std::string& wards_path);

}  // namespace cea::synth
