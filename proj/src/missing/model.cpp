#include "missing/model.hpp"

#include <sstream>

#include "missing/profile.hpp"
#include "util/error.hpp"

namespace cea::missing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MissingnessModelFit fit_missingness_model(const trial::MergedDataset& merged, int timepoint_day, int quad_points,
                                          int max_iter) {
  size_t tp = 0;
  for (size_t t = 1; t < trial::kNumTimepoints; ++t) {
    if (trial::kTimepointDays[t] == timepoint_day) tp = t;
  }
  if (tp == 0) throw validation_error("fit_missingness_model: timepoint must be 10, 30 or 90 days");

  const std::vector<std::string> terms = {"intercept",          "arm",        "eq5d_baseline", "ward_specialty",
                                          "ward_baseline_readm", "ward_pct_over_75", "sex"};
  const size_t n = merged.patients.size();
  MatrixXd X(n, terms.size());
  VectorXd y(n);
  std::vector<int> cluster(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& p = merged.patients[i];
    const auto& w = merged.ward_of(p);
    if (!p.utilities[0] || !w.baseline_readm_rate_pct) {
      throw validation_error("fit_missingness_model: baseline values must be completed first");
    }
    X(i, 0) = 1.0;
    X(i, 1) = p.arm == trial::Arm::intervention ? 1.0 : 0.0;
    X(i, 2) = *p.utilities[0];
    X(i, 3) = w.specialty_elderly ? 1.0 : 0.0;
    X(i, 4) = *w.baseline_readm_rate_pct;
    X(i, 5) = w.pct_over_75;
    X(i, 6) = p.male ? 1.0 : 0.0;
    y[i] = (cell_eligible(p, tp) && !p.utilities[tp]) ? 1.0 : 0.0;
    cluster[i] = static_cast<int>(p.ward_pos);
  }

  const auto glmm =
      estimation::fit_glmm_aghq(X, y, cluster, terms, estimation::GlmmFamily::bernoulli_logit, quad_points, max_iter);
  if (!glmm.converged) {
    std::ostringstream os;
    os << "missingness model did not converge after " << glmm.iterations << " iterations; last iterate:";
    for (Eigen::Index i = 0; i < glmm.last_iterate.size(); ++i) os << ' ' << glmm.last_iterate[i];
    throw convergence_error(os.str());
  }

  MissingnessModelFit fit;
  fit.timepoint_day = timepoint_day;
  fit.terms = terms;
  fit.coefficients.assign(glmm.beta.data(), glmm.beta.data() + glmm.beta.size());
  fit.se = glmm.se;
  fit.z = glmm.z;
  fit.cluster_variance = glmm.sigma_u * glmm.sigma_u;
  fit.loglik = glmm.loglik;
  fit.n = n;
  return fit;
}

}  // namespace cea::missing
