#include "missing/mice.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "util/error.hpp"
#include "util/parallel.hpp"
#include "util/rng.hpp"

namespace cea::missing {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using trial::Arm;
using trial::MergedDataset;
using trial::PatientRecord;

std::optional<double> get_field(const PatientRecord& p, const std::string& field) {
  if (field == "u_base") return p.utilities[0];
  if (field == "u10") return p.utilities[1];
  if (field == "u30") return p.utilities[2];
  if (field == "u90") return p.utilities[3];
  if (field == "hosp_cost") return p.hosp_cost;
  auto it = p.resources.find(field);
  if (it == p.resources.end()) throw internal_error("get_field: unknown field '" + field + "'");
  return it->second;
}

void set_field(PatientRecord& p, const std::string& field, double value) {
  if (field == "u_base") {
    p.utilities[0] = value;
  } else if (field == "u10") {
    p.utilities[1] = value;
  } else if (field == "u30") {
    p.utilities[2] = value;
  } else if (field == "u90") {
    p.utilities[3] = value;
  } else if (field == "hosp_cost") {
    p.hosp_cost = value;
  } else {
    auto it = p.resources.find(field);
    if (it == p.resources.end()) throw internal_error("set_field: unknown field '" + field + "'");
    it->second = value;
  }
}

namespace {

struct MiVariable {
  std::string field;
  bool is_count = false;
  std::vector<size_t> missing_rows;  // arm-local row indices
  double missing_pct = 0.0;
};

// Follow-up utility timepoint index, or nullopt for non-utility fields.
std::optional<size_t> utility_timepoint(const std::string& field) {
  if (field == "u10") return 1;
  if (field == "u30") return 2;
  if (field == "u90") return 3;
  return std::nullopt;
}

bool field_eligible(const PatientRecord& p, const std::string& field) {
  if (auto tp = utility_timepoint(field)) return cell_eligible(p, *tp);
  return true;
}

struct BayesDraw {
  VectorXd beta_hat;
  VectorXd beta_draw;
  double sigma_draw = 0.0;
  bool ridged = false;
};

// Ordinary least squares with a posterior draw of (beta, sigma). Collinear
// designs fall back to a relative ridge penalty; the caller records it.
BayesDraw bayes_lm_draw(const MatrixXd& X, const VectorXd& y, double ridge, Rng& rng) {
  const auto n = X.rows();
  const auto p = X.cols();
  MatrixXd A = X.transpose() * X;
  const VectorXd b = X.transpose() * y;

  BayesDraw out;
  {
    Eigen::LDLT<MatrixXd> ldlt(A);
    const VectorXd d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= dmax * 1e-10) {
      A.diagonal().array() += ridge * (A.trace() / static_cast<double>(p));
      out.ridged = true;
    }
  }
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    // Severely degenerate even after the ridge; escalate once.
    A.diagonal().array() += 1e-2 * (A.trace() / static_cast<double>(p));
    llt.compute(A);
    out.ridged = true;
    if (llt.info() != Eigen::Success) throw convergence_error("imputation regression: design not factorisable");
  }
  out.beta_hat = llt.solve(b);

  const VectorXd resid = y - X * out.beta_hat;
  const double rss = resid.squaredNorm();
  const double df = std::max<double>(static_cast<double>(n - p), 3.0);
  const double sigma2 = rss / rng.chi_squared(df);
  out.sigma_draw = std::sqrt(sigma2);

  VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.normal();
  // Cov(beta | sigma) = sigma^2 A^{-1}; A = L L^T so L^{-T} z has the right
  // covariance.
  out.beta_draw = out.beta_hat + out.sigma_draw * llt.matrixU().solve(z);
  return out;
}

// Predictive mean matching: draw one of the k observed rows whose fitted
// value is closest to the target prediction.
size_t pick_donor(const std::vector<std::pair<double, size_t>>& sorted_preds, double target, size_t k, Rng& rng) {
  const size_t n = sorted_preds.size();
  k = std::min(k, n);
  auto cmp = [](const std::pair<double, size_t>& a, double b) { return a.first < b; };
  size_t hi = static_cast<size_t>(
      std::lower_bound(sorted_preds.begin(), sorted_preds.end(), target, cmp) - sorted_preds.begin());
  size_t lo = hi;  // candidate window [lo, hi)
  while (hi - lo < k) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (target - sorted_preds[lo - 1].first <= sorted_preds[hi].first - target) {
      --lo;
    } else {
      ++hi;
    }
  }
  return sorted_preds[lo + rng.uniform_int(k)].second;
}

struct ArmPlan {
  Arm arm;
  std::vector<size_t> rows;                 // patient indices in dataset order
  std::vector<std::string> fixed_names;     // covariate columns incl. ward dummies
  MatrixXd fixed;                           // rows x fixed covariates (incl. intercept)
  std::vector<MiVariable> variables;        // only those with missing cells, visit order
  std::vector<std::string> all_fields;      // every analysis variable (predictor pool)
};

ArmPlan build_plan(const MergedDataset& data, Arm arm, const std::vector<std::string>& fields,
                   const std::set<std::string>& count_fields, const ImputationSpec& spec) {
  ArmPlan plan;
  plan.arm = arm;
  for (size_t i = 0; i < data.patients.size(); ++i) {
    if (data.patients[i].arm == arm) plan.rows.push_back(i);
  }
  plan.all_fields = fields;

  // Ward indicator columns: wards present in this arm, first one dropped as
  // the reference.
  std::vector<std::string> arm_wards;
  for (size_t i : plan.rows) {
    const auto& id = data.patients[i].ward_id;
    if (std::find(arm_wards.begin(), arm_wards.end(), id) == arm_wards.end()) arm_wards.push_back(id);
  }
  std::sort(arm_wards.begin(), arm_wards.end());

  plan.fixed_names = {"intercept", "u_base", "sex", "ward_specialty", "ward_readm_rate", "ward_pct_over_75"};
  for (size_t w = 1; w < arm_wards.size(); ++w) plan.fixed_names.push_back("ward:" + arm_wards[w]);

  plan.fixed.resize(static_cast<Eigen::Index>(plan.rows.size()), static_cast<Eigen::Index>(plan.fixed_names.size()));
  for (size_t r = 0; r < plan.rows.size(); ++r) {
    const auto& p = data.patients[plan.rows[r]];
    const auto& ward = data.ward_of(p);
    if (!p.utilities[0] || !ward.baseline_readm_rate_pct) {
      throw internal_error("mice_by_arm: baseline values must be completed first");
    }
    size_t c = 0;
    plan.fixed(r, c++) = 1.0;
    plan.fixed(r, c++) = *p.utilities[0];
    plan.fixed(r, c++) = p.male ? 1.0 : 0.0;
    plan.fixed(r, c++) = ward.specialty_elderly ? 1.0 : 0.0;
    plan.fixed(r, c++) = *ward.baseline_readm_rate_pct;
    plan.fixed(r, c++) = ward.pct_over_75;
    for (size_t w = 1; w < arm_wards.size(); ++w) plan.fixed(r, c++) = p.ward_id == arm_wards[w] ? 1.0 : 0.0;
  }

  for (const auto& field : fields) {
    MiVariable var;
    var.field = field;
    var.is_count = count_fields.count(field) > 0;
    size_t observed = 0;
    for (size_t r = 0; r < plan.rows.size(); ++r) {
      const auto& p = data.patients[plan.rows[r]];
      if (!field_eligible(p, field)) continue;  // structural zero, not imputed
      if (get_field(p, field)) {
        ++observed;
      } else {
        var.missing_rows.push_back(r);
      }
    }
    if (var.missing_rows.empty()) continue;
    if (observed < spec.min_complete_rows) {
      throw validation_error("mice_by_arm: variable '" + field + "' has only " + std::to_string(observed) +
                             " complete rows in the " + trial::arm_name(arm) +
                             " arm (minimum " + std::to_string(spec.min_complete_rows) + ")");
    }
    var.missing_pct =
        100.0 * static_cast<double>(var.missing_rows.size()) / static_cast<double>(var.missing_rows.size() + observed);
    plan.variables.push_back(std::move(var));
  }
  // Visit order: increasing missingness, ties alphabetically.
  std::sort(plan.variables.begin(), plan.variables.end(), [](const MiVariable& a, const MiVariable& b) {
    if (a.missing_pct != b.missing_pct) return a.missing_pct < b.missing_pct;
    return a.field < b.field;
  });
  return plan;
}

// One chained-equations run for a single (arm, imputation) pair; fills the
// missing cells of `data` in place and returns ridge-flagged variables.
std::set<std::string> run_chain(MergedDataset& data, const ArmPlan& plan, const ImputationSpec& spec, Rng& rng) {
  std::set<std::string> ridged;
  if (plan.variables.empty()) return ridged;

  const size_t n = plan.rows.size();

  // Working values per analysis variable; missing cells get an initial fill
  // drawn from the observed values of the same variable and arm.
  std::map<std::string, std::vector<double>> work;
  std::map<std::string, std::vector<bool>> is_missing;
  for (const auto& field : plan.all_fields) {
    std::vector<double> col(n, 0.0);
    std::vector<bool> miss(n, false);
    std::vector<double> observed;
    for (size_t r = 0; r < n; ++r) {
      const auto& p = data.patients[plan.rows[r]];
      if (auto v = get_field(p, field)) {
        col[r] = *v;
        if (field_eligible(p, field)) observed.push_back(*v);
      } else {
        miss[r] = true;
      }
    }
    for (size_t r = 0; r < n; ++r) {
      if (miss[r]) {
        if (observed.empty()) throw internal_error("mice: no observed values for '" + field + "'");
        col[r] = observed[rng.uniform_int(observed.size())];
      }
    }
    work[field] = std::move(col);
    is_missing[field] = std::move(miss);
  }

  const size_t p_fixed = plan.fixed_names.size();
  const size_t p_total = p_fixed + plan.all_fields.size() - 1;

  for (size_t cycle = 0; cycle < spec.cycles; ++cycle) {
    for (const auto& var : plan.variables) {
      // Rows eligible for this variable: observed rows train the model.
      std::vector<size_t> obs_rows;
      obs_rows.reserve(n);
      for (size_t r = 0; r < n; ++r) {
        if (!is_missing[var.field][r] && field_eligible(data.patients[plan.rows[r]], var.field)) {
          obs_rows.push_back(r);
        }
      }

      auto build_row = [&](size_t r, Eigen::RowVectorXd& dst) {
        for (size_t c = 0; c < p_fixed; ++c) dst[static_cast<Eigen::Index>(c)] = plan.fixed(r, c);
        size_t c = p_fixed;
        for (const auto& other : plan.all_fields) {
          if (other == var.field) continue;
          dst[static_cast<Eigen::Index>(c++)] = work[other][r];
        }
      };

      MatrixXd X(static_cast<Eigen::Index>(obs_rows.size()), static_cast<Eigen::Index>(p_total));
      VectorXd y(static_cast<Eigen::Index>(obs_rows.size()));
      Eigen::RowVectorXd xrow(static_cast<Eigen::Index>(p_total));
      for (size_t i = 0; i < obs_rows.size(); ++i) {
        build_row(obs_rows[i], xrow);
        X.row(static_cast<Eigen::Index>(i)) = xrow;
        const double raw = work[var.field][obs_rows[i]];
        y[static_cast<Eigen::Index>(i)] = var.is_count ? std::log1p(raw) : raw;
      }

      const BayesDraw draw = bayes_lm_draw(X, y, spec.ridge, rng);
      if (draw.ridged) ridged.insert(var.field);

      if (var.is_count) {
        for (size_t r : var.missing_rows) {
          build_row(r, xrow);
          const double eta = xrow * draw.beta_draw + draw.sigma_draw * rng.normal();
          const double value = std::max(0.0, std::round(std::expm1(eta)));
          work[var.field][r] = value;
        }
      } else {
        // Type-1 matching: observed fitted values from the OLS estimate,
        // targets from the posterior draw.
        std::vector<std::pair<double, size_t>> obs_preds;
        obs_preds.reserve(obs_rows.size());
        for (size_t i = 0; i < obs_rows.size(); ++i) {
          obs_preds.emplace_back(X.row(static_cast<Eigen::Index>(i)) * draw.beta_hat, obs_rows[i]);
        }
        std::sort(obs_preds.begin(), obs_preds.end());
        for (size_t r : var.missing_rows) {
          build_row(r, xrow);
          const double target = xrow * draw.beta_draw;
          const size_t donor = pick_donor(obs_preds, target, spec.pmm_donors, rng);
          work[var.field][r] = work[var.field][donor];
        }
      }
    }
  }

  for (const auto& var : plan.variables) {
    for (size_t r : var.missing_rows) {
      set_field(data.patients[plan.rows[r]], var.field, work[var.field][r]);
    }
  }
  return ridged;
}

}  // namespace

ImputedSets mice_by_arm(const MergedDataset& prepared, const ProvenanceMask& prepared_mask, size_t m_count,
                        uint64_t master_seed, const ImputationSpec& spec, size_t workers) {
  if (m_count < 2) throw validation_error("mice_by_arm: at least 2 imputations required");

  // Analysis variables: follow-up utilities always; hospitalisation cost and
  // CRF resources only when classified imputable.
  std::vector<std::string> fields = {"u10", "u30", "u90"};
  std::set<std::string> count_fields;
  if (spec.imputable_resources.count(trial::kHospitalisationResource)) fields.push_back("hosp_cost");
  for (const auto& name : trial::crf_resource_names()) {
    bool present = false;
    for (const auto& p : prepared.patients) {
      if (p.resources.count(name)) {
        present = true;
        break;
      }
    }
    if (present && spec.imputable_resources.count(name)) {
      fields.push_back(name);
      count_fields.insert(name);
    }
  }

  const ArmPlan plan_control = build_plan(prepared, Arm::control, fields, count_fields, spec);
  const ArmPlan plan_intervention = build_plan(prepared, Arm::intervention, fields, count_fields, spec);

  ImputedSets out;
  out.count = m_count;
  out.master_seed = master_seed;
  out.mask = prepared_mask;
  if (out.mask.patients() == 0) out.mask.resize(prepared.patients.size());
  for (const auto* plan : {&plan_control, &plan_intervention}) {
    for (const auto& var : plan->variables) {
      for (size_t r : var.missing_rows) {
        out.mask.set(plan->rows[r], var.field, CellFlag::imputed_mi);
      }
    }
  }

  out.datasets.assign(m_count, prepared);
  std::vector<std::set<std::string>> ridged_ctl(m_count), ridged_int(m_count);

  for (size_t m = 1; m <= m_count; ++m) {
    out.seed_ledger.push_back({trial::arm_name(Arm::control), m,
                               derive_seed(master_seed, "mice", {static_cast<uint64_t>(Arm::control), m})});
    out.seed_ledger.push_back({trial::arm_name(Arm::intervention), m,
                               derive_seed(master_seed, "mice", {static_cast<uint64_t>(Arm::intervention), m})});
  }

  parallel_for(m_count, workers, [&](size_t idx) {
    auto& data = out.datasets[idx];
    const size_t m = idx + 1;
    Rng rng_ctl(derive_seed(master_seed, "mice", {static_cast<uint64_t>(Arm::control), m}));
    Rng rng_int(derive_seed(master_seed, "mice", {static_cast<uint64_t>(Arm::intervention), m}));
    ridged_ctl[idx] = run_chain(data, plan_control, spec, rng_ctl);
    ridged_int[idx] = run_chain(data, plan_intervention, spec, rng_int);
  });

  std::set<std::string> ridged_any_ctl, ridged_any_int;
  for (size_t m = 0; m < m_count; ++m) {
    ridged_any_ctl.insert(ridged_ctl[m].begin(), ridged_ctl[m].end());
    ridged_any_int.insert(ridged_int[m].begin(), ridged_int[m].end());
  }
  for (const auto& f : ridged_any_ctl) {
    out.log.push_back("ridge fallback (penalty " + std::to_string(spec.ridge) + ") in control arm, variable " + f);
  }
  for (const auto& f : ridged_any_int) {
    out.log.push_back("ridge fallback (penalty " + std::to_string(spec.ridge) + ") in intervention arm, variable " +
                      f);
  }
  return out;
}

}  // namespace cea::missing
