#include "pipeline/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "estimation/glmm.hpp"
#include "estimation/lmm.hpp"
#include "estimation/sur.hpp"
#include "outcomes/qaly.hpp"
#include "util/csv.hpp"
#include "util/error.hpp"
#include "util/parallel.hpp"
#include "util/rng.hpp"

namespace cea::pipeline {

namespace fs = std::filesystem;
using estimation::AnalysisRow;
using nlohmann::json;
using trial::Arm;
using trial::MergedDataset;

std::vector<AnalysisRow> analysis_rows(const MergedDataset& completed, const outcomes::UnitCostTable& costs,
                                       const std::set<std::string>& imputable_resources) {
  std::vector<AnalysisRow> rows;
  rows.reserve(completed.patients.size());
  for (const auto& p : completed.patients) {
    outcomes::UtilityTrajectory traj;
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      if (!p.utilities[t]) {
        throw validation_error("analysis_rows: utility missing for patient '" + p.id +
                               "' (dataset not completed)");
      }
      traj.utilities[t] = *p.utilities[t];
    }
    traj.death_day = p.death_day;

    const auto& ward = completed.ward_of(p);
    if (!ward.baseline_readm_rate_pct) {
      throw validation_error("analysis_rows: ward baseline rate missing (dataset not completed)");
    }

    AnalysisRow r;
    r.qaly = outcomes::qaly_auc(traj);
    r.cost = outcomes::total_cost(p, imputable_resources, costs).total;
    r.arm = p.arm == Arm::intervention ? 1.0 : 0.0;
    r.sex = p.male ? 1.0 : 0.0;
    r.ward_specialty = ward.specialty_elderly ? 1.0 : 0.0;
    r.ward_readm_rate = *ward.baseline_readm_rate_pct;
    r.ward_pct_over_75 = ward.pct_over_75;
    r.baseline_utility = *p.utilities[0];
    r.cluster = static_cast<int>(p.ward_pos);
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct DiffFit {
  double mean0 = 0.0;
  double mean1 = 0.0;
  double diff = 0.0;
  double var = 0.0;
};

struct PerImputation {
  DiffFit lmm_cost, lmm_qaly, sur_cost, sur_qaly;
};

DiffFit from_adjusted(const estimation::AdjustedDifference& a) {
  return {a.mean_control, a.mean_intervention, a.difference, a.se * a.se};
}

// Gaussian REML path for one endpoint.
DiffFit fit_lmm_endpoint(const estimation::Design& d) {
  const auto fit = estimation::fit_lmm_reml(d.y, d.X, d.cluster, d.names);
  return from_adjusted(estimation::adjusted_difference(d.X, fit.beta, fit.beta_cov, d.arm_column,
                                                       static_cast<double>(fit.n - fit.p)));
}

// Gamma-log sensitivity option for the cost endpoint: random-intercept GLMM,
// adjusted means by marginal standardisation with the lognormal frailty
// correction, SE by the delta method over the fixed-effect covariance.
DiffFit fit_cost_gamma(const estimation::Design& d) {
  if ((d.y.array() <= 0.0).any()) {
    throw validation_error(
        "gamma-log cost model requires strictly positive costs; use the gaussian_identity family or add an offset");
  }
  const auto fit = estimation::fit_glmm_aghq(d.X, d.y, d.cluster, d.names, estimation::GlmmFamily::gamma_log);
  if (!fit.converged) throw convergence_error("gamma-log cost model did not converge");

  const double frailty = std::exp(0.5 * fit.sigma_u * fit.sigma_u);
  auto means = [&](const Eigen::VectorXd& beta) {
    Eigen::MatrixXd X0 = d.X, X1 = d.X;
    X0.col(static_cast<Eigen::Index>(d.arm_column)).setZero();
    X1.col(static_cast<Eigen::Index>(d.arm_column)).setOnes();
    const double m0 = (X0 * beta).array().exp().mean() * frailty;
    const double m1 = (X1 * beta).array().exp().mean() * frailty;
    return std::pair<double, double>(m0, m1);
  };
  const auto [m0, m1] = means(fit.beta);

  DiffFit out;
  out.mean0 = m0;
  out.mean1 = m1;
  out.diff = m1 - m0;

  // Delta method on the fixed effects.
  const auto p = fit.beta.size();
  Eigen::VectorXd grad(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = 1e-6 * std::max(1.0, std::fabs(fit.beta[j]));
    Eigen::VectorXd bp = fit.beta, bm = fit.beta;
    bp[j] += h;
    bm[j] -= h;
    const auto [p0, p1] = means(bp);
    const auto [q0, q1] = means(bm);
    grad[j] = ((p1 - p0) - (q1 - q0)) / (2.0 * h);
  }
  // The GLMM fit exposes per-coefficient SEs; the delta method here keeps
  // the diagonal, which is conservative for the arm contrast.
  double var = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double se_i = i < static_cast<Eigen::Index>(fit.se.size()) ? fit.se[i] : 0.0;
    var += grad[i] * grad[i] * se_i * se_i;
  }
  out.var = var;
  return out;
}

PerImputation fit_one(const std::vector<AnalysisRow>& rows, CostFamily family) {
  const auto dc = estimation::build_design(rows, estimation::Endpoint::cost);
  const auto dq = estimation::build_design(rows, estimation::Endpoint::qaly);

  PerImputation out;
  out.lmm_cost = family == CostFamily::gamma_log ? fit_cost_gamma(dc) : fit_lmm_endpoint(dc);
  out.lmm_qaly = fit_lmm_endpoint(dq);

  const auto sur = estimation::fit_sur(dc, dq);
  {
    const auto pc = static_cast<Eigen::Index>(sur.p_cost);
    const auto pq = static_cast<Eigen::Index>(sur.p_qaly);
    const auto adj_c = estimation::adjusted_difference(dc.X, sur.beta_cost(), sur.vcov.topLeftCorner(pc, pc),
                                                       dc.arm_column, static_cast<double>(sur.n - sur.p_cost));
    const auto adj_q = estimation::adjusted_difference(dq.X, sur.beta_qaly(), sur.vcov.bottomRightCorner(pq, pq),
                                                       dq.arm_column, static_cast<double>(sur.n - sur.p_qaly));
    out.sur_cost = from_adjusted(adj_c);
    out.sur_qaly = from_adjusted(adj_q);
  }
  return out;
}

EndpointPooled pool_endpoint(const std::vector<DiffFit>& fits, double complete_df) {
  std::vector<double> diffs, vars, m0, m1;
  for (const auto& f : fits) {
    diffs.push_back(f.diff);
    vars.push_back(f.var);
    m0.push_back(f.mean0);
    m1.push_back(f.mean1);
  }
  EndpointPooled out;
  out.difference = uncertainty::rubin_pool(diffs, vars, complete_df);
  out.adj_mean_control = std::accumulate(m0.begin(), m0.end(), 0.0) / static_cast<double>(m0.size());
  out.adj_mean_intervention = std::accumulate(m1.begin(), m1.end(), 0.0) / static_cast<double>(m1.size());
  return out;
}

double cloud_percentile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

}  // namespace

AnalysisResult analyze_imputed(const missing::ImputedSets& imputed, const AnalysisConfig& cfg,
                               const outcomes::UnitCostTable& costs, const std::set<std::string>& imputable_resources,
                               uint64_t master_seed, int scenario_id, size_t workers) {
  if (imputed.datasets.empty()) throw validation_error("analyze_imputed: no imputed datasets");
  const size_t m_count = imputed.datasets.size();

  std::vector<std::vector<AnalysisRow>> rows(m_count);
  std::vector<PerImputation> fits(m_count);
  parallel_for(m_count, workers, [&](size_t m) {
    rows[m] = analysis_rows(imputed.datasets[m], costs, imputable_resources);
    fits[m] = fit_one(rows[m], cfg.cost_family);
  });

  const size_t n = rows.front().size();
  const double df_cost = static_cast<double>(n - 6);  // intercept + 5 covariates
  const double df_qaly = static_cast<double>(n - 7);  // + baseline utility

  AnalysisResult out;
  out.scenario_id = scenario_id;
  out.m = m_count;
  out.b = cfg.bootstrap_replicates;
  out.notes = imputed.log;

  auto collect = [&](auto member) {
    std::vector<DiffFit> v;
    v.reserve(m_count);
    for (const auto& f : fits) v.push_back(f.*member);
    return v;
  };
  out.lmm.cost = pool_endpoint(collect(&PerImputation::lmm_cost), df_cost);
  out.lmm.qaly = pool_endpoint(collect(&PerImputation::lmm_qaly), df_qaly);
  out.sur.cost = pool_endpoint(collect(&PerImputation::sur_cost), df_cost);
  out.sur.qaly = pool_endpoint(collect(&PerImputation::sur_qaly), df_qaly);

  out.icer_lmm = decision::icer(out.lmm.cost.difference.point, out.lmm.qaly.difference.point);
  out.icer_sur = decision::icer(out.sur.cost.difference.point, out.sur.qaly.difference.point);

  // Within-imputation cluster bootstrap, pooled across imputations.
  const auto estimator = cfg.bootstrap_estimator == EstimatorKind::lmm ? uncertainty::BootstrapEstimator::lmm
                                                                       : uncertainty::BootstrapEstimator::sur;
  std::vector<std::vector<uncertainty::CePoint>> clouds(m_count);
  for (size_t m = 0; m < m_count; ++m) {
    const uint64_t seed_m =
        derive_seed(master_seed, "bootstrap", {static_cast<uint64_t>(scenario_id), static_cast<uint64_t>(m + 1)});
    clouds[m] = uncertainty::cluster_bootstrap(rows[m], cfg.bootstrap_replicates, seed_m, estimator, workers);
  }
  out.cloud = uncertainty::pool_clouds(clouds, master_seed);

  const auto grid = uncertainty::threshold_grid(cfg.thresholds.min, cfg.thresholds.max, cfg.thresholds.step,
                                                cfg.thresholds.always_include);
  out.ceac = uncertainty::compute_ceac(out.cloud, grid);

  // Decision metrics at the primary and named thresholds, from the primary
  // (hierarchical-model) pooled differences; probabilities from the cloud.
  std::vector<double> lambdas = cfg.thresholds.always_include;
  lambdas.push_back(cfg.primary_threshold);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  const double dc = out.lmm.cost.difference.point;
  const double de = out.lmm.qaly.difference.point;
  for (double lambda : lambdas) {
    ThresholdMetrics t;
    t.lambda = lambda;
    t.nhb = decision::nhb(dc, de, lambda);
    t.nmb = decision::nmb(dc, de, lambda);
    size_t pos = 0;
    std::vector<double> nhb_points;
    nhb_points.reserve(out.cloud.points.size());
    for (const auto& pt : out.cloud.points) {
      if (lambda * pt.delta_e - pt.delta_c > 0.0) ++pos;
      nhb_points.push_back(pt.delta_e - pt.delta_c / lambda);
    }
    t.prob_ce = static_cast<double>(pos) / static_cast<double>(out.cloud.points.size());
    t.nhb_ci_lower = cloud_percentile(nhb_points, 0.025);
    t.nhb_ci_upper = cloud_percentile(nhb_points, 0.975);
    out.thresholds.push_back(t);
  }
  return out;
}

std::vector<ScenarioResult> run_scenarios(const missing::ImputedSets& imputed, const AnalysisConfig& cfg,
                                          const outcomes::UnitCostTable& costs,
                                          const std::set<std::string>& imputable_resources, uint64_t master_seed,
                                          size_t workers) {
  std::vector<ScenarioResult> out;
  for (const auto& scenario : decision::scenario_table()) {
    const auto rescaled = decision::apply_mnar_rescale(imputed, scenario);
    ScenarioResult r;
    r.scenario = scenario;
    r.analysis = analyze_imputed(rescaled, cfg, costs, imputable_resources, master_seed, scenario.id, workers);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset and imputation-directory serialisation.

std::string dataset_to_csv(const MergedDataset& dataset) {
  std::vector<std::string> resource_cols;
  for (const auto& name : trial::crf_resource_names()) {
    for (const auto& p : dataset.patients) {
      if (p.resources.count(name)) {
        resource_cols.push_back(name);
        break;
      }
    }
  }
  std::vector<std::string> header = {"patient_id",  "ward_id",      "arm",       "age",
                                     "sex_male",    "death_day",    "index_stay_days", "readm_known",
                                     "n_readm",     "readm_days",   "hosp_cost", "specialty_elderly",
                                     "baseline_readm_rate_pct", "pct_over_75", "u_base", "u10", "u30", "u90"};
  for (const auto& name : resource_cols) header.push_back(name);
  CsvWriter w(header);
  for (const auto& p : dataset.patients) {
    const auto& ward = dataset.ward_of(p);
    int readm_days = 0;
    for (const auto& adm : p.readmissions) readm_days += adm.length_days;
    std::vector<std::string> row = {
        p.id,
        p.ward_id,
        p.arm == Arm::intervention ? "1" : "0",
        CsvWriter::format(p.age),
        p.male ? "1" : "0",
        p.death_day ? std::to_string(*p.death_day) : "",
        CsvWriter::format(p.index_stay_days),
        p.readmissions_known ? "1" : "0",
        p.readmissions_known ? std::to_string(p.readmissions.size()) : "",
        p.readmissions_known ? std::to_string(readm_days) : "",
        CsvWriter::format(p.hosp_cost),
        ward.specialty_elderly ? "1" : "0",
        CsvWriter::format(ward.baseline_readm_rate_pct),
        CsvWriter::format(ward.pct_over_75),
        CsvWriter::format(p.utilities[0]),
        CsvWriter::format(p.utilities[1]),
        CsvWriter::format(p.utilities[2]),
        CsvWriter::format(p.utilities[3]),
    };
    for (const auto& name : resource_cols) {
      auto it = p.resources.find(name);
      row.push_back(it == p.resources.end() ? "" : CsvWriter::format(it->second));
    }
    w.add_row(row);
  }
  return w.to_string();
}

MergedDataset dataset_from_csv(const std::string& text, const std::string& origin) {
  const CsvTable t = CsvTable::read_string(text, origin);
  MergedDataset out;
  std::map<std::string, size_t> ward_pos;
  const size_t c_id = t.column("patient_id");
  const size_t c_ward = t.column("ward_id");
  const size_t c_arm = t.column("arm");
  const size_t c_age = t.column("age");
  const size_t c_sex = t.column("sex_male");
  const size_t c_death = t.column("death_day");
  const size_t c_stay = t.column("index_stay_days");
  const size_t c_known = t.column("readm_known");
  const size_t c_nreadm = t.column("n_readm");
  const size_t c_readm_days = t.column("readm_days");
  const size_t c_hosp = t.column("hosp_cost");
  const size_t c_spec = t.column("specialty_elderly");
  const size_t c_rate = t.column("baseline_readm_rate_pct");
  const size_t c_p75 = t.column("pct_over_75");
  const std::array<size_t, 4> c_u = {t.column("u_base"), t.column("u10"), t.column("u30"), t.column("u90")};
  std::vector<std::pair<std::string, size_t>> resource_cols;
  for (const auto& name : trial::crf_resource_names()) {
    if (auto c = t.find_column(name)) resource_cols.emplace_back(name, *c);
  }

  for (size_t r = 0; r < t.rows(); ++r) {
    trial::PatientRecord p;
    p.id = t.cell(r, c_id);
    p.ward_id = t.cell(r, c_ward);
    p.arm = *t.get_long(r, c_arm) == 1 ? Arm::intervention : Arm::control;
    p.age = *t.get_double(r, c_age);
    p.male = *t.get_long(r, c_sex) == 1;
    if (auto d = t.get_long(r, c_death)) p.death_day = static_cast<int>(*d);
    p.index_stay_days = t.get_double(r, c_stay);
    p.readmissions_known = *t.get_long(r, c_known) == 1;
    if (p.readmissions_known) {
      // Counts survive the round trip as a single synthetic spell so that
      // summaries (not costs, which ride in hosp_cost) stay meaningful.
      const long nr = t.get_long(r, c_nreadm).value_or(0);
      const long days = t.get_long(r, c_readm_days).value_or(0);
      for (long k = 0; k < nr; ++k) {
        trial::Readmission adm;
        adm.start_day = 0;
        adm.length_days = k == 0 ? static_cast<int>(days) : 0;
        p.readmissions.push_back(adm);
      }
    }
    p.hosp_cost = t.get_double(r, c_hosp);
    for (size_t u = 0; u < 4; ++u) p.utilities[u] = t.get_double(r, c_u[u]);
    for (const auto& [name, col] : resource_cols) p.resources[name] = t.get_double(r, col);

    auto [it, inserted] = ward_pos.try_emplace(p.ward_id, out.wards.size());
    if (inserted) {
      trial::WardInfo ward;
      ward.id = p.ward_id;
      ward.specialty_elderly = *t.get_long(r, c_spec) == 1;
      ward.baseline_readm_rate_pct = t.get_double(r, c_rate);
      ward.pct_over_75 = *t.get_double(r, c_p75);
      out.wards.push_back(ward);
    }
    p.ward_pos = it->second;
    out.patients.push_back(std::move(p));
  }
  return out;
}

namespace {

std::string flag_name(missing::CellFlag f) {
  switch (f) {
    case missing::CellFlag::observed: return "observed";
    case missing::CellFlag::imputed_baseline: return "imputed_baseline";
    case missing::CellFlag::imputed_mi: return "imputed_mi";
    case missing::CellFlag::structural_zero: return "structural_zero";
  }
  return "observed";
}

missing::CellFlag flag_from_name(const std::string& s) {
  if (s == "imputed_baseline") return missing::CellFlag::imputed_baseline;
  if (s == "imputed_mi") return missing::CellFlag::imputed_mi;
  if (s == "structural_zero") return missing::CellFlag::structural_zero;
  return missing::CellFlag::observed;
}

}  // namespace

void write_imputations(const missing::ImputedSets& sets, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t m = 0; m < sets.datasets.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof(name), "imputation_%03zu.csv", m + 1);
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw io_error("cannot write imputation file in " + dir);
    out << dataset_to_csv(sets.datasets[m]);
  }

  json mask = json::object();
  mask["m"] = sets.count;
  mask["master_seed"] = sets.master_seed;
  mask["log"] = sets.log;
  json ledger = json::array();
  for (const auto& e : sets.seed_ledger) {
    ledger.push_back({{"arm", e.arm}, {"imputation", e.imputation}, {"seed", e.seed}});
  }
  mask["seed_ledger"] = ledger;
  // Emit per-flag cell lists (patient index, field).
  for (const auto& flag :
       {missing::CellFlag::imputed_baseline, missing::CellFlag::imputed_mi, missing::CellFlag::structural_zero}) {
    json list = json::array();
    for (const auto& [patient, field] : sets.mask.cells_with(flag)) {
      list.push_back({{"patient", patient}, {"field", field}});
    }
    mask["cells"][flag_name(flag)] = list;
  }
  std::ofstream out(fs::path(dir) / "mask.json", std::ios::binary);
  if (!out) throw io_error("cannot write mask.json in " + dir);
  out << mask.dump(2) << '\n';
}

missing::ImputedSets load_imputations(const std::string& dir) {
  const fs::path mask_path = fs::path(dir) / "mask.json";
  std::ifstream in(mask_path, std::ios::binary);
  if (!in) throw io_error("cannot open " + mask_path.string());
  json mask;
  try {
    mask = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
  } catch (const json::parse_error& e) {
    throw validation_error(mask_path.string() + ": invalid JSON: " + e.what());
  }

  missing::ImputedSets sets;
  sets.count = mask.at("m").get<size_t>();
  sets.master_seed = mask.at("master_seed").get<uint64_t>();
  if (mask.contains("log")) sets.log = mask.at("log").get<std::vector<std::string>>();
  if (mask.contains("seed_ledger")) {
    for (const auto& e : mask.at("seed_ledger")) {
      sets.seed_ledger.push_back(
          {e.at("arm").get<std::string>(), e.at("imputation").get<size_t>(), e.at("seed").get<uint64_t>()});
    }
  }
  for (size_t m = 1; m <= sets.count; ++m) {
    char name[32];
    std::snprintf(name, sizeof(name), "imputation_%03zu.csv", m);
    const fs::path p = fs::path(dir) / name;
    std::ifstream f(p, std::ios::binary);
    if (!f) throw io_error("cannot open " + p.string());
    sets.datasets.push_back(dataset_from_csv(std::string(std::istreambuf_iterator<char>(f), {}), p.string()));
  }
  sets.mask.resize(sets.datasets.empty() ? 0 : sets.datasets.front().patients.size());
  if (mask.contains("cells")) {
    for (const auto& [flag_str, list] : mask.at("cells").items()) {
      for (const auto& cell : list) {
        sets.mask.set(cell.at("patient").get<size_t>(), cell.at("field").get<std::string>(),
                      flag_from_name(flag_str));
      }
    }
  }
  return sets;
}

}  // namespace cea::pipeline
