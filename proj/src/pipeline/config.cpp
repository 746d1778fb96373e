#include "pipeline/config.hpp"

#include <fstream>

#include <json.hpp>

#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/parallel.hpp"

namespace cea::pipeline {

using nlohmann::json;

namespace {

synth::SimConfig parse_sim(const json& j, const std::string& origin) {
  synth::SimConfig s;
  s.wards_per_arm = j.value("wards_per_arm", s.wards_per_arm);
  s.patients_per_ward_min = j.value("patients_per_ward_min", s.patients_per_ward_min);
  s.patients_per_ward_max = j.value("patients_per_ward_max", s.patients_per_ward_max);
  s.true_delta_cost = j.value("true_delta_cost", s.true_delta_cost);
  s.true_delta_qaly = j.value("true_delta_qaly", s.true_delta_qaly);
  s.admission_rate = j.value("admission_rate", s.admission_rate);
  s.mean_los_days = j.value("mean_los_days", s.mean_los_days);
  s.ward_sd_cost = j.value("ward_sd_cost", s.ward_sd_cost);
  s.tariff_per_admission = j.value("tariff_per_admission", s.tariff_per_admission);
  s.tariff_per_day = j.value("tariff_per_day", s.tariff_per_day);
  s.baseline_utility_mean = j.value("baseline_utility_mean", s.baseline_utility_mean);
  s.ward_sd_utility = j.value("ward_sd_utility", s.ward_sd_utility);
  s.patient_sd_utility = j.value("patient_sd_utility", s.patient_sd_utility);
  s.resid_sd_utility = j.value("resid_sd_utility", s.resid_sd_utility);
  s.ar1_rho = j.value("ar1_rho", s.ar1_rho);
  s.death_probability = j.value("death_probability", s.death_probability);
  s.resource_rate = j.value("resource_rate", s.resource_rate);
  s.resource_unit_cost = j.value("resource_unit_cost", s.resource_unit_cost);
  s.seed = j.value("seed", s.seed);
  if (j.contains("missingness")) {
    const auto& m = j.at("missingness");
    const std::string mech = m.value("mechanism", "mcar");
    if (mech == "mcar") {
      s.missingness.mechanism = synth::Mechanism::mcar;
    } else if (mech == "mar") {
      s.missingness.mechanism = synth::Mechanism::mar;
    } else if (mech == "mnar") {
      s.missingness.mechanism = synth::Mechanism::mnar;
    } else {
      throw validation_error(origin + ": unknown missingness mechanism '" + mech + "'");
    }
    s.missingness.mcar_p = m.value("mcar_p", s.missingness.mcar_p);
    s.missingness.target_rate = m.value("target_rate", s.missingness.target_rate);
    s.missingness.coef_baseline_utility = m.value("coef_baseline_utility", s.missingness.coef_baseline_utility);
    s.missingness.coef_sex = m.value("coef_sex", s.missingness.coef_sex);
    s.missingness.coef_arm = m.value("coef_arm", s.missingness.coef_arm);
    s.missingness.coef_value = m.value("coef_value", s.missingness.coef_value);
    s.missingness.resource_mcar_p = m.value("resource_mcar_p", s.missingness.resource_mcar_p);
  }
  return s;
}

}  // namespace

size_t RunConfig::effective_workers() const { return workers == 0 ? hardware_workers() : workers; }

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file: " + path);
  return from_json_text(std::string(std::istreambuf_iterator<char>(in), {}), path);
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(origin + ": invalid JSON: " + e.what());
  }

  RunConfig c;
  c.origin = origin;
  try {
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      c.routine_csv = in.value("routine", "");
      c.crf_csv = in.value("crf", "");
      c.wards_csv = in.value("wards", "");
      c.valueset_csv = in.value("valueset", "");
      c.unit_costs_json = in.value("unit_costs", "");
      c.imputations_dir = in.value("imputations_dir", "");
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.strict_parsing = j.value("strict_parsing", c.strict_parsing);
    if (j.contains("scenarios")) c.scenarios_enabled = j.at("scenarios").value("enabled", true);

    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      if (a.contains("imputations") && !a.at("imputations").is_null()) {
        c.analysis.imputations = a.at("imputations").get<size_t>();
      }
      c.analysis.bootstrap_replicates = a.value("bootstrap_replicates", c.analysis.bootstrap_replicates);
      c.analysis.primary_threshold = a.value("primary_threshold", c.analysis.primary_threshold);
      if (a.contains("thresholds")) {
        const auto& t = a.at("thresholds");
        c.analysis.thresholds.min = t.value("min", c.analysis.thresholds.min);
        c.analysis.thresholds.max = t.value("max", c.analysis.thresholds.max);
        c.analysis.thresholds.step = t.value("step", c.analysis.thresholds.step);
        if (t.contains("always_include")) {
          c.analysis.thresholds.always_include = t.at("always_include").get<std::vector<double>>();
        }
      }
      const std::string fam = a.value("cost_family", "gaussian_identity");
      if (fam == "gaussian_identity") {
        c.analysis.cost_family = CostFamily::gaussian_identity;
      } else if (fam == "gamma_log") {
        c.analysis.cost_family = CostFamily::gamma_log;
      } else {
        throw validation_error(origin + ": unknown cost_family '" + fam + "'");
      }
      c.analysis.include_early_decedents = a.value("include_early_decedents", true);
      const std::string est = a.value("bootstrap_estimator", "lmm");
      if (est == "lmm") {
        c.analysis.bootstrap_estimator = EstimatorKind::lmm;
      } else if (est == "sur") {
        c.analysis.bootstrap_estimator = EstimatorKind::sur;
      } else {
        throw validation_error(origin + ": unknown bootstrap_estimator '" + est + "'");
      }
      c.analysis.resource_missing_threshold =
          a.value("resource_missing_threshold", c.analysis.resource_missing_threshold);
      if (a.contains("imputable_resources") && !a.at("imputable_resources").is_null()) {
        std::set<std::string> names;
        for (const auto& v : a.at("imputable_resources")) names.insert(v.get<std::string>());
        c.analysis.imputable_resources = names;
      }
      if (a.contains("mice")) {
        const auto& m = a.at("mice");
        c.analysis.mice.pmm_donors = m.value("pmm_donors", c.analysis.mice.pmm_donors);
        c.analysis.mice.cycles = m.value("cycles", c.analysis.mice.cycles);
        c.analysis.mice.ridge = m.value("ridge", c.analysis.mice.ridge);
        c.analysis.mice.min_complete_rows = m.value("min_complete_rows", c.analysis.mice.min_complete_rows);
      }
    }
    if (j.contains("simulate")) {
      c.simulate = parse_sim(j.at("simulate"), origin);
      c.has_simulate = true;
    }
  } catch (const json::exception& e) {
    throw validation_error(origin + ": config schema error: " + e.what());
  }

  if (c.analysis.resource_missing_threshold <= 0.0 || c.analysis.resource_missing_threshold > 1.0) {
    throw validation_error(origin + ": resource_missing_threshold must be in (0, 1]");
  }
  if (!(c.analysis.primary_threshold > 0.0)) {
    throw validation_error(origin + ": primary_threshold must be positive");
  }
  if (c.analysis.bootstrap_replicates < 1) {
    throw validation_error(origin + ": bootstrap_replicates must be at least 1");
  }

  // Fingerprint the canonicalised JSON so equal configurations hash equally
  // regardless of formatting.
  c.config_fingerprint = fingerprint_hex(j.dump());
  return c;
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
  auto parse_u64 = [&](const std::string& v) -> uint64_t {
    try {
      return std::stoull(v);
    } catch (...) {
      throw validation_error("override '" + key + "': not an integer: " + v);
    }
  };
  if (key == "seed") {
    seed = parse_u64(value);
  } else if (key == "out" || key == "output_dir") {
    output_dir = value;
  } else if (key == "workers") {
    workers = static_cast<size_t>(parse_u64(value));
  } else if (key == "serial") {
    if (value == "true" || value == "1") workers = 1;
  } else if (key == "strict") {
    strict_parsing = value == "true" || value == "1";
  } else if (key == "imputations") {
    analysis.imputations = static_cast<size_t>(parse_u64(value));
  } else if (key == "bootstrap_replicates") {
    analysis.bootstrap_replicates = static_cast<size_t>(parse_u64(value));
  } else {
    throw validation_error("unknown override key '" + key + "'");
  }
  // Overrides change the effective configuration, so they change the hash.
  config_fingerprint = fingerprint_hex(config_fingerprint + "|" + key + "=" + value);
}

}  // namespace cea::pipeline
