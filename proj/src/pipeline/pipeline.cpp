#include "pipeline/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "missing/model.hpp"
#include "outcomes/valueset.hpp"
#include "pipeline/render.hpp"
#include "trial/merge.hpp"
#include "trial/parse.hpp"
#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/num.hpp"

namespace cea::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
public:
  Manifest(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    start_ = std::chrono::steady_clock::now();
    started_at_ = iso8601_now();
  }

  void stage_done(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - last_).count();
    stages_.push_back({{"stage", name}, {"ms", ms}});
    last_ = now;
  }

  void add_artifact(const std::string& path) { artifacts_.push_back(path); }

  void write() const {
    json j;
    j["engine_version"] = kEngineVersion;
    j["command"] = command_;
    j["config_fingerprint"] = cfg_.config_fingerprint;
    j["seed"] = cfg_.seed;
    j["workers"] = cfg_.effective_workers();
    j["started_at"] = started_at_;
    j["finished_at"] = iso8601_now();
    const auto total = std::chrono::steady_clock::now() - start_;
    j["total_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(total).count();
    j["stages"] = stages_;
    json inputs = json::object();
    for (const auto& path : {cfg_.routine_csv, cfg_.crf_csv, cfg_.wards_csv, cfg_.valueset_csv, cfg_.unit_costs_json}) {
      if (!path.empty() && fs::exists(path)) inputs[path] = fingerprint_file(path);
    }
    j["input_fingerprints"] = inputs;
    json arts = json::object();
    for (const auto& a : artifacts_) {
      if (fs::exists(a)) arts[fs::path(a).filename().string()] = fingerprint_file(a);
    }
    j["artifact_fingerprints"] = arts;
    std::ofstream out(fs::path(cfg_.output_dir) / "manifest.json", std::ios::binary);
    if (!out) throw io_error("cannot write manifest.json in " + cfg_.output_dir);
    out << j.dump(2) << '\n';
  }

private:
  const RunConfig& cfg_;
  std::string command_;
  std::string started_at_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  json stages_ = json::array();
  std::vector<std::string> artifacts_;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + path);
  out << content;
}

void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct Prepared {
  trial::MergedDataset merged;  // utilities attached, hospital costs priced
  trial::JoinReport join;
  trial::BaselineTable baseline;
  size_t parse_issue_count = 0;
  missing::MissingnessReport report;  // profiled before baseline completion
  missing::ResourceClassification classification;
  trial::MergedDataset prepared;  // baseline-completed, post-death zeros set
  missing::ProvenanceMask mask;
  std::vector<missing::BaselineImputeEntry> baseline_log;
  size_t m_chosen = 0;
  outcomes::UnitCostTable unit_costs;
};

Prepared prepare(const RunConfig& cfg) {
  for (const auto& [label, path] : std::initializer_list<std::pair<const char*, const std::string&>>{
           {"routine", cfg.routine_csv}, {"crf", cfg.crf_csv}, {"wards", cfg.wards_csv}}) {
    if (path.empty()) throw validation_error(std::string("config: inputs.") + label + " is required");
    if (!fs::exists(path)) throw io_error(std::string("file not found: ") + path);
  }
  if (!cfg.unit_costs_json.empty() && !fs::exists(cfg.unit_costs_json)) {
    throw io_error("file not found: " + cfg.unit_costs_json);
  }
  if (!cfg.valueset_csv.empty() && !fs::exists(cfg.valueset_csv)) {
    throw io_error("file not found: " + cfg.valueset_csv);
  }

  Prepared out;
  const auto routine = trial::parse_routine_csv(cfg.routine_csv, cfg.strict_parsing);
  const auto crf = trial::parse_crf_csv(cfg.crf_csv, cfg.strict_parsing);
  const auto wards = trial::parse_wards_csv(cfg.wards_csv, cfg.strict_parsing);
  out.parse_issue_count = routine.issues.size() + crf.issues.size() + wards.issues.size();

  trial::MergeOptions mopts;
  mopts.include_early_decedents = cfg.analysis.include_early_decedents;
  auto merge = trial::merge_datasets(routine, crf, wards, mopts);
  out.join = merge.report;
  out.merged = std::move(merge.dataset);

  if (cfg.valueset_csv.empty()) {
    outcomes::attach_utilities(out.merged, outcomes::ValueSet::builtin_default());
  } else {
    outcomes::attach_utilities(out.merged, outcomes::ValueSet::load_csv(cfg.valueset_csv));
  }
  out.unit_costs = cfg.unit_costs_json.empty() ? outcomes::UnitCostTable{}
                                               : outcomes::UnitCostTable::load_json(cfg.unit_costs_json);
  if (cfg.unit_costs_json.empty()) {
    throw validation_error("config: inputs.unit_costs is required");
  }
  for (auto& p : out.merged.patients) {
    if (p.readmissions_known && !p.hosp_cost) {
      p.hosp_cost = outcomes::hospitalisation_cost(p.readmissions, out.unit_costs);
    }
  }

  out.baseline = trial::baseline_summary(out.merged);
  out.report = missing::profile_missingness(out.merged, cfg.analysis.resource_missing_threshold);
  out.classification = missing::classify_resources(out.report, cfg.analysis.resource_missing_threshold,
                                                   cfg.analysis.imputable_resources);

  if (!out.classification.imputable.count(trial::kHospitalisationResource)) {
    for (const auto& p : out.merged.patients) {
      if (!p.readmissions_known) {
        throw validation_error(
            "hospitalisation is classified complete-case-only but patient '" + p.id +
            "' has unknown readmissions; the cost endpoint cannot be built");
      }
    }
  }

  auto baseline_result = missing::impute_baseline_cluster_means(out.merged);
  out.prepared = std::move(baseline_result.dataset);
  out.mask = std::move(baseline_result.mask);
  out.baseline_log = std::move(baseline_result.log);
  missing::apply_death_structural_zeros(out.prepared, out.mask);
  out.m_chosen = missing::choose_imputation_count(out.report, cfg.analysis.imputations);
  return out;
}

missing::ImputedSets obtain_imputations(const RunConfig& cfg, const Prepared& prep) {
  if (!cfg.imputations_dir.empty()) return load_imputations(cfg.imputations_dir);
  missing::ImputationSpec spec;
  spec.pmm_donors = cfg.analysis.mice.pmm_donors;
  spec.cycles = cfg.analysis.mice.cycles;
  spec.ridge = cfg.analysis.mice.ridge;
  spec.min_complete_rows = cfg.analysis.mice.min_complete_rows;
  spec.imputable_resources = prep.classification.imputable;
  return missing::mice_by_arm(prep.prepared, prep.mask, prep.m_chosen, cfg.seed, spec, cfg.effective_workers());
}

json join_report_json(const Prepared& prep, const RunConfig& cfg) {
  json j;
  j["engine_version"] = kEngineVersion;
  j["config_fingerprint"] = cfg.config_fingerprint;
  j["seed"] = cfg.seed;
  j["routine_count"] = prep.join.routine_count;
  j["crf_count"] = prep.join.crf_count;
  j["merged_count"] = prep.join.merged_count;
  j["ward_count"] = prep.join.ward_count;
  j["decedents_retained"] = prep.join.decedents_retained;
  j["decedents_dropped"] = prep.join.decedents_dropped;
  j["unmatched_routine_ids"] = prep.join.unmatched_routine_ids;
  j["unmatched_crf_ids"] = prep.join.unmatched_crf_ids;
  j["parse_issues"] = prep.parse_issue_count;
  json baseline = json::array();
  for (const auto& row : prep.baseline.rows) {
    baseline.push_back({{"variable", row.variable},
                        {"binary", row.binary},
                        {"mean_intervention", row.mean_intervention},
                        {"sd_intervention", row.sd_intervention},
                        {"mean_control", row.mean_control},
                        {"sd_control", row.sd_control},
                        {"mean_total", row.mean_total},
                        {"sd_total", row.sd_total},
                        {"p_value", row.p_defined ? json(row.p_value) : json()}});
  }
  j["baseline"] = baseline;
  return j;
}

json pooled_json(const AnalysisResult& r, const RunConfig& cfg) {
  auto endpoint = [](const EndpointPooled& e) {
    return json{{"adj_mean_control", e.adj_mean_control},
                {"adj_mean_intervention", e.adj_mean_intervention},
                {"difference", e.difference.point},
                {"se", e.difference.se},
                {"ci", {e.difference.ci_lower, e.difference.ci_upper}},
                {"within_variance", e.difference.within_variance},
                {"between_variance", e.difference.between_variance},
                {"total_variance", e.difference.total_variance},
                {"df", e.difference.df}};
  };
  json j;
  j["engine_version"] = kEngineVersion;
  j["config_fingerprint"] = cfg.config_fingerprint;
  j["seed"] = cfg.seed;
  j["scenario"] = r.scenario_id;
  j["imputations"] = r.m;
  j["bootstrap_replicates"] = r.b;
  j["estimators"] = {
      {"mme_glm", {{"cost", endpoint(r.lmm.cost)}, {"qaly", endpoint(r.lmm.qaly)}, {"icer", r.icer_lmm.label}}},
      {"sur", {{"cost", endpoint(r.sur.cost)}, {"qaly", endpoint(r.sur.qaly)}, {"icer", r.icer_sur.label}}}};
  json thresholds = json::array();
  for (const auto& t : r.thresholds) {
    thresholds.push_back({{"lambda", t.lambda},
                          {"nhb", t.nhb},
                          {"nmb", t.nmb},
                          {"prob_cost_effective", t.prob_ce},
                          {"nhb_ci", {t.nhb_ci_lower, t.nhb_ci_upper}}});
  }
  j["thresholds"] = thresholds;
  const auto q = uncertainty::quadrant_shares(r.cloud);
  j["ce_plane_quadrants"] = {{"ne", q.ne}, {"nw", q.nw}, {"se", q.se}, {"sw", q.sw}};
  j["notes"] = r.notes;
  return j;
}

json scenarios_json(const std::vector<ScenarioResult>& scenarios, const RunConfig& cfg) {
  json arr = json::array();
  for (const auto& s : scenarios) {
    const auto& a = s.analysis;
    const ThresholdMetrics* prim = nullptr;
    const ThresholdMetrics* at15 = nullptr;
    for (const auto& t : a.thresholds) {
      if (t.lambda == cfg.analysis.primary_threshold) prim = &t;
      if (t.lambda == 15000.0) at15 = &t;
    }
    json row = {{"id", s.scenario.id},
                {"c_control", s.scenario.c_control},
                {"c_intervention", s.scenario.c_intervention},
                {"delta_c", a.lmm.cost.difference.point},
                {"delta_c_ci", {a.lmm.cost.difference.ci_lower, a.lmm.cost.difference.ci_upper}},
                {"delta_e", a.lmm.qaly.difference.point},
                {"delta_e_ci", {a.lmm.qaly.difference.ci_lower, a.lmm.qaly.difference.ci_upper}}};
    if (prim) {
      row["nhb"] = prim->nhb;
      row["nhb_ci"] = {prim->nhb_ci_lower, prim->nhb_ci_upper};
      row["prob_ce_primary"] = prim->prob_ce;
      row["primary_threshold"] = prim->lambda;
    }
    if (at15) row["prob_ce_15000"] = at15->prob_ce;
    arr.push_back(row);
  }
  json j;
  j["engine_version"] = kEngineVersion;
  j["config_fingerprint"] = cfg.config_fingerprint;
  j["seed"] = cfg.seed;
  j["scenarios"] = arr;
  return j;
}

json missing_report_json(const Prepared& prep, const std::vector<missing::MissingnessModelFit>& fits,
                         const RunConfig& cfg) {
  json j;
  j["engine_version"] = kEngineVersion;
  j["config_fingerprint"] = cfg.config_fingerprint;
  j["seed"] = cfg.seed;
  j["n_patients"] = prep.report.n_patients;
  json vars = json::array();
  for (const auto& v : prep.report.variables) {
    vars.push_back({{"variable", v.variable},
                    {"group", v.group},
                    {"missing", v.missing},
                    {"total", v.total},
                    {"percent", v.percent}});
  }
  j["variables"] = vars;
  j["incomplete_case_percent"] = prep.report.incomplete_case_percent;
  j["chosen_imputations"] = prep.m_chosen;
  j["imputable_resources"] = json::array();
  for (const auto& r : prep.classification.imputable) j["imputable_resources"].push_back(r);
  j["complete_case_only_resources"] = json::array();
  for (const auto& r : prep.classification.complete_case_only) j["complete_case_only_resources"].push_back(r);
  json patterns = json::object();
  for (const auto& [k, v] : prep.report.patterns.counts) patterns[k] = v;
  j["patterns"] = patterns;
  j["monotone"] = prep.report.patterns.monotone;
  j["non_monotone"] = prep.report.patterns.non_monotone;
  json arm_tp = json::array();
  const char* arm_names[2] = {"intervention", "control"};
  for (size_t a = 0; a < 2; ++a) {
    arm_tp.push_back({{"arm", arm_names[a]},
                      {"n", prep.report.n_by_arm[a]},
                      {"missing_by_timepoint", prep.report.eq5d_missing_by_arm[a]}});
  }
  j["eq5d_by_arm"] = arm_tp;
  json models = json::array();
  for (const auto& f : fits) {
    json m;
    m["timepoint_day"] = f.timepoint_day;
    json coef = json::array();
    for (size_t i = 0; i < f.terms.size(); ++i) {
      json c = {{"term", f.terms[i]}, {"estimate", f.coefficients[i]}};
      if (i < f.z.size() && std::isfinite(f.z[i])) c["z"] = f.z[i];
      coef.push_back(c);
    }
    m["coefficients"] = coef;
    m["cluster_variance"] = f.cluster_variance;
    m["n"] = f.n;
    models.push_back(m);
  }
  j["missingness_models"] = models;
  return j;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

AnalysisConfig analysis_config(const RunConfig& cfg) { return cfg.analysis; }

// Shared by analyze / ceac / mnar / report.
struct FullAnalysis {
  Prepared prep;
  missing::ImputedSets imputed;
  AnalysisResult base;
};

FullAnalysis run_base_analysis(const RunConfig& cfg) {
  FullAnalysis fa{prepare(cfg), {}, {}};
  fa.imputed = obtain_imputations(cfg, fa.prep);
  fa.base = analyze_imputed(fa.imputed, analysis_config(cfg), fa.prep.unit_costs, fa.prep.classification.imputable,
                            cfg.seed, /*scenario_id=*/1, cfg.effective_workers());
  return fa;
}

CommandResult cmd_ingest(const RunConfig& cfg, Manifest& manifest) {
  const Prepared prep = prepare(cfg);
  manifest.stage_done("ingest");
  write_text_file(out_path(cfg, "merged.csv"), dataset_to_csv(prep.merged));
  const json report = join_report_json(prep, cfg);
  write_json_file(out_path(cfg, "report.json"), report);
  manifest.add_artifact(out_path(cfg, "merged.csv"));
  manifest.add_artifact(out_path(cfg, "report.json"));
  manifest.stage_done("write");

  CommandResult res;
  res.command = "ingest";
  res.summary = report;
  res.text = "merged " + std::to_string(prep.join.merged_count) + " patients across " +
             std::to_string(prep.join.ward_count) + " wards (routine " + std::to_string(prep.join.routine_count) +
             ", CRF " + std::to_string(prep.join.crf_count) + ")\n\n" + render_baseline_table(prep.baseline);
  return res;
}

CommandResult cmd_missing(const RunConfig& cfg, Manifest& manifest) {
  const Prepared prep = prepare(cfg);
  manifest.stage_done("ingest");
  std::vector<missing::MissingnessModelFit> fits;
  for (int day : {10, 30, 90}) {
    const auto* var = prep.report.find(std::string("eq5d_") + std::to_string(day));
    if (var && var->missing > 0 && var->missing < var->total) {
      fits.push_back(missing::fit_missingness_model(prep.prepared, day));
    }
  }
  manifest.stage_done("missingness_models");
  const json report = missing_report_json(prep, fits, cfg);
  write_json_file(out_path(cfg, "missing_report.json"), report);
  const std::string text = render_missing_report(prep.report, fits);
  write_text_file(out_path(cfg, "missing_report.txt"), text);
  manifest.add_artifact(out_path(cfg, "missing_report.json"));
  manifest.add_artifact(out_path(cfg, "missing_report.txt"));
  manifest.stage_done("write");

  CommandResult res;
  res.command = "missing";
  res.summary = report;
  res.text = text;
  return res;
}

CommandResult cmd_impute(const RunConfig& cfg, Manifest& manifest) {
  const Prepared prep = prepare(cfg);
  manifest.stage_done("ingest");
  const auto imputed = obtain_imputations(cfg, prep);
  manifest.stage_done("impute");
  const std::string dir = out_path(cfg, "imputations");
  write_imputations(imputed, dir);
  manifest.add_artifact((fs::path(dir) / "mask.json").string());
  manifest.stage_done("write");

  CommandResult res;
  res.command = "impute";
  res.summary = {{"engine_version", kEngineVersion},
                 {"config_fingerprint", cfg.config_fingerprint},
                 {"seed", cfg.seed},
                 {"imputations", imputed.count},
                 {"directory", dir},
                 {"notes", imputed.log}};
  res.text = "wrote " + std::to_string(imputed.count) + " imputed datasets to " + dir + "\n";
  return res;
}

CommandResult cmd_analyze(const RunConfig& cfg, Manifest& manifest) {
  const FullAnalysis fa = run_base_analysis(cfg);
  manifest.stage_done("analyze");
  const json pooled = pooled_json(fa.base, cfg);
  write_json_file(out_path(cfg, "pooled_estimates.json"), pooled);
  const std::string text = render_analysis_table(fa.base);
  write_text_file(out_path(cfg, "analysis_table.txt"), text);
  manifest.add_artifact(out_path(cfg, "pooled_estimates.json"));
  manifest.add_artifact(out_path(cfg, "analysis_table.txt"));
  manifest.stage_done("write");

  CommandResult res;
  res.command = "analyze";
  res.summary = pooled;
  res.text = text;
  return res;
}

CommandResult cmd_ceac(const RunConfig& cfg, Manifest& manifest) {
  const FullAnalysis fa = run_base_analysis(cfg);
  manifest.stage_done("analyze");
  write_text_file(out_path(cfg, "ceac.csv"), uncertainty::ceac_csv(fa.base.ceac));
  write_text_file(out_path(cfg, "ce_plane.csv"), uncertainty::ce_plane_csv({{1, &fa.base.cloud}}));
  const auto q = uncertainty::quadrant_shares(fa.base.cloud);
  write_json_file(out_path(cfg, "ce_plane_quadrants.json"),
                  json{{"config_fingerprint", cfg.config_fingerprint},
                       {"scenario", 1},
                       {"points", fa.base.cloud.points.size()},
                       {"quadrants", {{"ne", q.ne}, {"nw", q.nw}, {"se", q.se}, {"sw", q.sw}}}});
  write_text_file(out_path(cfg, "ce_plane.svg"), ce_plane_svg(fa.base.cloud, "Cost-effectiveness plane"));
  write_text_file(out_path(cfg, "ceac.svg"), ceac_svg(fa.base.ceac, "Cost-effectiveness acceptability curve"));
  for (const auto& name : {"ceac.csv", "ce_plane.csv", "ce_plane_quadrants.json", "ce_plane.svg", "ceac.svg"}) {
    manifest.add_artifact(out_path(cfg, name));
  }
  manifest.stage_done("write");

  CommandResult res;
  res.command = "ceac";
  res.summary = {{"engine_version", kEngineVersion},
                 {"config_fingerprint", cfg.config_fingerprint},
                 {"seed", cfg.seed},
                 {"thresholds", fa.base.ceac.thresholds.size()},
                 {"points", fa.base.cloud.points.size()}};
  res.text = "wrote ceac.csv (" + std::to_string(fa.base.ceac.thresholds.size()) + " thresholds) and ce_plane.csv (" +
             std::to_string(fa.base.cloud.points.size()) + " points)\n";
  return res;
}

CommandResult cmd_mnar(const RunConfig& cfg, Manifest& manifest) {
  const Prepared prep = prepare(cfg);
  auto imputed = obtain_imputations(cfg, prep);
  manifest.stage_done("impute");
  const auto scenarios = run_scenarios(imputed, analysis_config(cfg), prep.unit_costs, prep.classification.imputable,
                                       cfg.seed, cfg.effective_workers());
  manifest.stage_done("scenarios");
  const json sj = scenarios_json(scenarios, cfg);
  write_json_file(out_path(cfg, "scenarios.json"), sj);
  const std::string text = render_scenario_table(scenarios, cfg.analysis.primary_threshold);
  write_text_file(out_path(cfg, "scenarios_table.txt"), text);
  std::vector<std::pair<int, const uncertainty::CeCloud*>> clouds;
  for (const auto& s : scenarios) clouds.emplace_back(s.scenario.id, &s.analysis.cloud);
  write_text_file(out_path(cfg, "ce_plane.csv"), uncertainty::ce_plane_csv(clouds));
  manifest.add_artifact(out_path(cfg, "scenarios.json"));
  manifest.add_artifact(out_path(cfg, "scenarios_table.txt"));
  manifest.add_artifact(out_path(cfg, "ce_plane.csv"));
  manifest.stage_done("write");

  CommandResult res;
  res.command = "mnar";
  res.summary = sj;
  res.text = text;
  return res;
}

CommandResult cmd_simulate(const RunConfig& cfg, Manifest& manifest) {
  if (!cfg.has_simulate) throw validation_error("config: a 'simulate' section is required for this command");
  auto trial = synth::generate_trial(cfg.simulate);
  auto holes = synth::apply_missingness(trial.complete, cfg.simulate.missingness, cfg.simulate.seed);
  manifest.stage_done("simulate");

  const std::string routine = out_path(cfg, "routine.csv");
  const std::string crf = out_path(cfg, "crf.csv");
  const std::string wards = out_path(cfg, "wards.csv");
  synth::write_trial_csvs(holes.dataset, routine, crf, wards);

  // Companion inputs so the generated trial is immediately analysable.
  const std::string unit_costs = out_path(cfg, "unit_costs.json");
  write_json_file(unit_costs,
                  json{{"currency_year", 2022},
                       {"wages_per_minute", {{"nursing", 0.90}, {"medical", 2.682}}},
                       {"intervention_activity",
                        json::array({{{"staff", "nursing"}, {"incremental_minutes", 75.0}},
                                     {{"staff", "medical"}, {"incremental_minutes", 10.0}}})},
                       {"tariffs",
                        {{"per_admission", cfg.simulate.tariff_per_admission},
                         {"per_day", cfg.simulate.tariff_per_day}}},
                       {"resources", {{"outpatient", cfg.simulate.resource_unit_cost}}}});
  const std::string truth_path = out_path(cfg, "ground_truth.json");
  write_json_file(truth_path, json{{"config_fingerprint", cfg.config_fingerprint},
                                   {"seed", cfg.simulate.seed},
                                   {"delta_cost", trial.truth.delta_cost},
                                   {"delta_qaly", trial.truth.delta_qaly},
                                   {"nhb_15000", trial.truth.nhb_15000},
                                   {"sample_delta_cost", trial.truth.sample_delta_cost},
                                   {"sample_delta_qaly", trial.truth.sample_delta_qaly},
                                   {"deleted_cells", holes.deleted.size()}});
  const std::string trial_cfg_path = out_path(cfg, "trial_config.json");
  write_json_file(trial_cfg_path, json{{"inputs",
                                        {{"routine", routine},
                                         {"crf", crf},
                                         {"wards", wards},
                                         {"unit_costs", unit_costs}}},
                                       {"output_dir", cfg.output_dir},
                                       {"seed", cfg.seed},
                                       {"workers", cfg.workers},
                                       {"analysis", {{"bootstrap_replicates", cfg.analysis.bootstrap_replicates}}}});
  for (const auto& p : {routine, crf, wards, unit_costs, truth_path, trial_cfg_path}) manifest.add_artifact(p);
  manifest.stage_done("write");

  CommandResult res;
  res.command = "simulate";
  res.summary = {{"engine_version", kEngineVersion},
                 {"config_fingerprint", cfg.config_fingerprint},
                 {"patients", holes.dataset.patients.size()},
                 {"wards", holes.dataset.wards.size()},
                 {"deleted_cells", holes.deleted.size()},
                 {"true_delta_cost", trial.truth.delta_cost},
                 {"true_delta_qaly", trial.truth.delta_qaly}};
  res.text = "simulated " + std::to_string(holes.dataset.patients.size()) + " patients in " +
             std::to_string(holes.dataset.wards.size()) + " wards; " + std::to_string(holes.deleted.size()) +
             " cells deleted\n";
  return res;
}

CommandResult cmd_report(const RunConfig& cfg, Manifest& manifest) {
  const Prepared prep = prepare(cfg);
  manifest.stage_done("ingest");
  write_text_file(out_path(cfg, "merged.csv"), dataset_to_csv(prep.merged));
  write_json_file(out_path(cfg, "report.json"), join_report_json(prep, cfg));

  std::vector<missing::MissingnessModelFit> fits;
  for (int day : {10, 30, 90}) {
    const auto* var = prep.report.find(std::string("eq5d_") + std::to_string(day));
    if (var && var->missing > 0 && var->missing < var->total) {
      fits.push_back(missing::fit_missingness_model(prep.prepared, day));
    }
  }
  write_json_file(out_path(cfg, "missing_report.json"), missing_report_json(prep, fits, cfg));
  write_text_file(out_path(cfg, "missing_report.txt"), render_missing_report(prep.report, fits));
  manifest.stage_done("missing");

  const auto imputed = obtain_imputations(cfg, prep);
  write_imputations(imputed, out_path(cfg, "imputations"));
  manifest.stage_done("impute");

  const auto base = analyze_imputed(imputed, analysis_config(cfg), prep.unit_costs, prep.classification.imputable,
                                    cfg.seed, 1, cfg.effective_workers());
  write_json_file(out_path(cfg, "pooled_estimates.json"), pooled_json(base, cfg));
  write_text_file(out_path(cfg, "analysis_table.txt"), render_analysis_table(base));
  write_text_file(out_path(cfg, "ceac.csv"), uncertainty::ceac_csv(base.ceac));
  write_text_file(out_path(cfg, "ce_plane.svg"), ce_plane_svg(base.cloud, "Cost-effectiveness plane"));
  write_text_file(out_path(cfg, "ceac.svg"), ceac_svg(base.ceac, "Cost-effectiveness acceptability curve"));
  manifest.stage_done("analyze");

  std::string text = render_analysis_table(base);
  if (cfg.scenarios_enabled) {
    const auto scenarios = run_scenarios(imputed, analysis_config(cfg), prep.unit_costs,
                                         prep.classification.imputable, cfg.seed, cfg.effective_workers());
    write_json_file(out_path(cfg, "scenarios.json"), scenarios_json(scenarios, cfg));
    write_text_file(out_path(cfg, "scenarios_table.txt"),
                    render_scenario_table(scenarios, cfg.analysis.primary_threshold));
    std::vector<std::pair<int, const uncertainty::CeCloud*>> clouds;
    for (const auto& s : scenarios) clouds.emplace_back(s.scenario.id, &s.analysis.cloud);
    write_text_file(out_path(cfg, "ce_plane.csv"), uncertainty::ce_plane_csv(clouds));
    text += "\n" + render_scenario_table(scenarios, cfg.analysis.primary_threshold);
    manifest.stage_done("scenarios");
  } else {
    write_text_file(out_path(cfg, "ce_plane.csv"), uncertainty::ce_plane_csv({{1, &base.cloud}}));
  }

  for (const auto& name :
       {"merged.csv", "report.json", "missing_report.json", "missing_report.txt", "pooled_estimates.json",
        "analysis_table.txt", "ceac.csv", "ce_plane.csv", "ce_plane.svg", "ceac.svg"}) {
    manifest.add_artifact(out_path(cfg, name));
  }
  if (cfg.scenarios_enabled) {
    manifest.add_artifact(out_path(cfg, "scenarios.json"));
    manifest.add_artifact(out_path(cfg, "scenarios_table.txt"));
  }
  manifest.stage_done("write");

  CommandResult res;
  res.command = "report";
  res.summary = pooled_json(base, cfg);
  res.text = text;
  return res;
}

}  // namespace

CommandResult run_command(const RunConfig& config, const std::string& command) {
  fs::create_directories(config.output_dir);
  Manifest manifest(config, command);
  CommandResult res;
  if (command == "ingest") {
    res = cmd_ingest(config, manifest);
  } else if (command == "missing") {
    res = cmd_missing(config, manifest);
  } else if (command == "impute") {
    res = cmd_impute(config, manifest);
  } else if (command == "analyze") {
    res = cmd_analyze(config, manifest);
  } else if (command == "ceac") {
    res = cmd_ceac(config, manifest);
  } else if (command == "mnar") {
    res = cmd_mnar(config, manifest);
  } else if (command == "simulate") {
    res = cmd_simulate(config, manifest);
  } else if (command == "report") {
    res = cmd_report(config, manifest);
  } else {
    throw validation_error("unknown command '" + command + "'");
  }
  manifest.write();
  return res;
}

}  // namespace cea::pipeline
