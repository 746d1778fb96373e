#include "synth/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "util/csv.hpp"
#include "util/error.hpp"
#include "util/num.hpp"
#include "util/rng.hpp"

namespace cea::synth {

using trial::Arm;
using trial::MergedDataset;
using trial::PatientRecord;

namespace {

// Trapezoid weights of the four measurements in the 90-day QALY integral.
constexpr double kFollowupWeight = 15.0 + 40.0 + 30.0;  // days 10, 30, 90

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

SimulatedTrial generate_trial(const SimConfig& cfg) {
  if (cfg.wards_per_arm < 2) throw validation_error("generate_trial: at least 2 wards per arm");
  if (cfg.patients_per_ward_min < 1 || cfg.patients_per_ward_max < cfg.patients_per_ward_min) {
    throw validation_error("generate_trial: invalid patients-per-ward range");
  }
  if (cfg.ward_sd_cost < 0 || cfg.ward_sd_utility < 0 || cfg.patient_sd_utility < 0 || cfg.resid_sd_utility < 0) {
    throw validation_error("generate_trial: standard deviations must be nonnegative");
  }
  if (!(cfg.admission_rate > 0.0)) throw validation_error("generate_trial: admission_rate must be positive");
  if (cfg.death_probability < 0.0 || cfg.death_probability > 1.0 || cfg.ar1_rho < -1.0 || cfg.ar1_rho > 1.0) {
    throw validation_error("generate_trial: probabilities/correlations out of range");
  }

  const double cost_per_admission = cfg.tariff_per_admission + cfg.mean_los_days * cfg.tariff_per_day;
  const double ratio = 1.0 + cfg.true_delta_cost / (cfg.admission_rate * cost_per_admission);
  if (!(ratio > 0.0)) {
    throw validation_error("generate_trial: true_delta_cost too negative for the admission rate and tariffs");
  }
  // log admission rate: alpha + gamma*arm + frailty; alpha set so that the
  // control-arm marginal mean equals admission_rate.
  const double alpha = std::log(cfg.admission_rate) - 0.5 * cfg.ward_sd_cost * cfg.ward_sd_cost;
  const double gamma = std::log(ratio);
  // follow-up utility shift reproducing the configured QALY effect
  const double delta_u = cfg.true_delta_qaly * 365.0 / kFollowupWeight;

  Rng rng(derive_seed(cfg.seed, "synth-trial"));

  SimulatedTrial out;
  out.truth.delta_cost = cfg.true_delta_cost;
  out.truth.delta_qaly = cfg.true_delta_qaly;
  out.truth.nhb_15000 = cfg.true_delta_qaly - cfg.true_delta_cost / 15000.0;

  const size_t total_wards = 2 * cfg.wards_per_arm;
  std::vector<double> sum_cost(2, 0.0), sum_qaly(2, 0.0);
  std::vector<size_t> n_arm(2, 0);

  size_t patient_seq = 0;
  for (size_t w = 0; w < total_wards; ++w) {
    const Arm arm = w < cfg.wards_per_arm ? Arm::intervention : Arm::control;
    trial::WardInfo ward;
    {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "W%03zu", w + 1);
      ward.id = buf;
    }
    ward.specialty_elderly = rng.uniform() < 0.55;
    ward.baseline_readm_rate_pct = std::clamp(19.0 + 6.0 * rng.normal(), 0.0, 45.0);
    ward.pct_over_75 = std::clamp(72.0 + 15.0 * rng.normal(), 30.0, 100.0);
    out.complete.wards.push_back(ward);

    const double frailty = cfg.ward_sd_cost * rng.normal();
    const double ward_u = cfg.ward_sd_utility * rng.normal();
    const size_t span = cfg.patients_per_ward_max - cfg.patients_per_ward_min + 1;
    const size_t n_patients = cfg.patients_per_ward_min + rng.uniform_int(span);

    for (size_t k = 0; k < n_patients; ++k) {
      PatientRecord p;
      {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%05zu", ++patient_seq);
        p.id = buf;
      }
      p.ward_id = ward.id;
      p.ward_pos = w;
      p.arm = arm;
      p.age = std::max(75.0, 83.0 + 5.5 * rng.normal());
      p.male = rng.uniform() < 0.44;

      if (cfg.death_probability > 0.0 && rng.uniform() < cfg.death_probability) {
        p.death_day = 1 + static_cast<int>(rng.uniform_int(90));
      }

      // Utility trajectory: ward + patient intercepts, AR(1) deviations, and
      // the treatment shift on every follow-up measurement.
      const double patient_u = cfg.patient_sd_utility * rng.normal();
      double dev = cfg.resid_sd_utility * rng.normal();
      for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
        if (t > 0) {
          dev = cfg.ar1_rho * dev +
                std::sqrt(std::max(0.0, 1.0 - cfg.ar1_rho * cfg.ar1_rho)) * cfg.resid_sd_utility * rng.normal();
        }
        double u = cfg.baseline_utility_mean + ward_u + patient_u + dev;
        if (t > 0 && arm == Arm::intervention) u += delta_u;
        p.utilities[t] = std::clamp(u, -0.594, 1.0);
      }

      // Readmissions: Poisson count at the ward's frailty-adjusted rate.
      const double mu = std::exp(alpha + (arm == Arm::intervention ? gamma : 0.0) + frailty);
      const int count = rng.poisson(mu);
      for (int a = 0; a < count; ++a) {
        trial::Readmission adm;
        adm.start_day = static_cast<int>(rng.uniform_int(90));
        adm.length_days = rng.poisson(cfg.mean_los_days);
        p.readmissions.push_back(adm);
      }
      p.index_stay_days = std::max(1.0, std::round(5.0 + 3.0 * rng.normal()));

      if (cfg.resource_rate > 0.0) {
        p.resources["outpatient"] = static_cast<double>(rng.poisson(cfg.resource_rate));
      }

      // Realised latent contrasts for diagnostics.
      double cost = 0.0;
      for (const auto& adm : p.readmissions) {
        cost += cfg.tariff_per_admission + adm.length_days * cfg.tariff_per_day;
      }
      if (cfg.resource_rate > 0.0) cost += *p.resources["outpatient"] * cfg.resource_unit_cost;
      const double qaly =
          (5.0 * *p.utilities[0] + 15.0 * *p.utilities[1] + 40.0 * *p.utilities[2] + 30.0 * *p.utilities[3]) / 365.0;
      const size_t ai = arm == Arm::intervention ? 0 : 1;
      sum_cost[ai] += cost;
      sum_qaly[ai] += qaly;
      ++n_arm[ai];

      out.complete.patients.push_back(std::move(p));
    }
  }

  out.truth.sample_delta_cost = sum_cost[0] / n_arm[0] - sum_cost[1] / n_arm[1];
  out.truth.sample_delta_qaly = sum_qaly[0] / n_arm[0] - sum_qaly[1] / n_arm[1];
  return out;
}

DeletionResult apply_missingness(const MergedDataset& complete, const MissingnessConfig& cfg, uint64_t seed) {
  if (cfg.mcar_p < 0.0 || cfg.mcar_p > 1.0 || cfg.resource_mcar_p < 0.0 || cfg.resource_mcar_p > 1.0) {
    throw validation_error("apply_missingness: probabilities must be in [0, 1]");
  }
  if (cfg.mechanism != Mechanism::mcar && (cfg.target_rate <= 0.0 || cfg.target_rate >= 1.0)) {
    throw validation_error("apply_missingness: target_rate must be in (0, 1)");
  }

  DeletionResult out;
  out.dataset = complete;
  Rng rng(derive_seed(seed, "synth-missingness"));

  // Calibrate the logit intercept at the covariate means so the marginal
  // deletion rate lands near the target.
  double mean_ubase = 0.0, mean_sex = 0.0, mean_arm = 0.0, mean_value = 0.0;
  size_t n_cells = 0;
  for (const auto& p : complete.patients) {
    for (size_t t = 1; t < trial::kNumTimepoints; ++t) {
      if (!p.utilities[t]) continue;
      mean_ubase += p.utilities[0].value_or(0.0);
      mean_sex += p.male ? 1.0 : 0.0;
      mean_arm += p.arm == Arm::intervention ? 1.0 : 0.0;
      mean_value += *p.utilities[t];
      ++n_cells;
    }
  }
  if (n_cells > 0) {
    mean_ubase /= n_cells;
    mean_sex /= n_cells;
    mean_arm /= n_cells;
    mean_value /= n_cells;
  }
  double intercept = 0.0;
  if (cfg.mechanism != Mechanism::mcar) {
    intercept = logit(cfg.target_rate) - cfg.coef_baseline_utility * mean_ubase - cfg.coef_sex * mean_sex -
                cfg.coef_arm * mean_arm;
    if (cfg.mechanism == Mechanism::mnar) intercept -= cfg.coef_value * mean_value;
  }

  for (size_t i = 0; i < out.dataset.patients.size(); ++i) {
    auto& p = out.dataset.patients[i];
    for (size_t t = 1; t < trial::kNumTimepoints; ++t) {
      if (!p.utilities[t]) continue;
      double prob = 0.0;
      switch (cfg.mechanism) {
        case Mechanism::mcar:
          prob = cfg.mcar_p;
          break;
        case Mechanism::mar:
          prob = logistic(intercept + cfg.coef_baseline_utility * p.utilities[0].value_or(0.0) +
                          cfg.coef_sex * (p.male ? 1.0 : 0.0) +
                          cfg.coef_arm * (p.arm == Arm::intervention ? 1.0 : 0.0));
          break;
        case Mechanism::mnar:
          prob = logistic(intercept + cfg.coef_baseline_utility * p.utilities[0].value_or(0.0) +
                          cfg.coef_sex * (p.male ? 1.0 : 0.0) +
                          cfg.coef_arm * (p.arm == Arm::intervention ? 1.0 : 0.0) + cfg.coef_value * *p.utilities[t]);
          break;
      }
      if (rng.uniform() < prob) {
        p.utilities[t].reset();
        p.profiles[t].reset();
        out.deleted.emplace_back(i, std::string("u") + trial::kTimepointLabels[t]);
      }
    }
    if (cfg.resource_mcar_p > 0.0) {
      for (auto& [name, value] : p.resources) {
        if (value && rng.uniform() < cfg.resource_mcar_p) {
          value.reset();
          out.deleted.emplace_back(i, name);
        }
      }
    }
  }
  return out;
}

void write_trial_csvs(const MergedDataset& dataset, const std::string& routine_path, const std::string& crf_path,
                      const std::string& wards_path) {
  size_t max_readm = 0;
  for (const auto& p : dataset.patients) max_readm = std::max(max_readm, p.readmissions.size());
  max_readm = std::max<size_t>(max_readm, 1);

  std::vector<std::string> routine_header = {"patient_id", "ward_id",         "arm",         "age",
                                             "sex_male",   "death_day",       "index_stay_days", "readm_missing"};
  for (size_t k = 1; k <= max_readm; ++k) {
    routine_header.push_back("readm_start_" + std::to_string(k));
    routine_header.push_back("readm_len_" + std::to_string(k));
  }
  CsvWriter routine(routine_header);
  for (const auto& p : dataset.patients) {
    std::vector<std::string> row = {
        p.id,
        p.ward_id,
        p.arm == Arm::intervention ? "1" : "0",
        CsvWriter::format(p.age),
        p.male ? "1" : "0",
        p.death_day ? std::to_string(*p.death_day) : "",
        CsvWriter::format(p.index_stay_days),
        p.readmissions_known ? "" : "1",
    };
    for (size_t k = 0; k < max_readm; ++k) {
      if (k < p.readmissions.size()) {
        row.push_back(std::to_string(p.readmissions[k].start_day));
        row.push_back(std::to_string(p.readmissions[k].length_days));
      } else {
        row.push_back("");
        row.push_back("");
      }
    }
    routine.add_row(row);
  }
  routine.write_file(routine_path);

  // CRF: descriptive profiles when present, index utilities always, plus any
  // simulated resources.
  std::vector<std::string> resource_cols;
  for (const auto& name : trial::crf_resource_names()) {
    for (const auto& p : dataset.patients) {
      if (p.resources.count(name)) {
        resource_cols.push_back(name);
        break;
      }
    }
  }
  std::vector<std::string> crf_header = {"patient_id"};
  for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
    for (const auto* dim : trial::kEq5dDims) {
      crf_header.push_back(std::string("eq5d_") + trial::kTimepointLabels[t] + "_" + dim);
    }
    crf_header.push_back(std::string("eq5d_") + trial::kTimepointLabels[t] + "_index");
  }
  for (const auto& name : resource_cols) crf_header.push_back(name);
  CsvWriter crf(crf_header);
  for (const auto& p : dataset.patients) {
    std::vector<std::string> row = {p.id};
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      for (size_t d = 0; d < 5; ++d) {
        row.push_back(p.profiles[t] ? std::to_string(p.profiles[t]->levels[d]) : "");
      }
      row.push_back(CsvWriter::format(p.utilities[t]));
    }
    for (const auto& name : resource_cols) {
      auto it = p.resources.find(name);
      row.push_back(it == p.resources.end() ? "" : CsvWriter::format(it->second));
    }
    crf.add_row(row);
  }
  crf.write_file(crf_path);

  CsvWriter wards({"ward_id", "specialty_elderly", "baseline_readm_rate_pct", "pct_over_75"});
  for (const auto& w : dataset.wards) {
    wards.add_row({w.id, w.specialty_elderly ? "1" : "0", CsvWriter::format(w.baseline_readm_rate_pct),
                   CsvWriter::format(w.pct_over_75)});
  }
  wards.write_file(wards_path);
}

}  // namespace cea::synth
