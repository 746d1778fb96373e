#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cea::estimation {

struct LmmFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::MatrixXd beta_cov;  // sigma2_e * (X' V^-1 X)^-1
  double sigma2_u = 0.0;     // ward random-intercept variance
  double sigma2_e = 0.0;     // residual variance
  double reml_loglik = 0.0;
  double log_ratio = 0.0;    // log(sigma2_u / sigma2_e); meaningless at the boundary
  bool boundary = false;     // variance ratio clamped at zero
  size_t n = 0;
  size_t p = 0;
  size_t n_clusters = 0;
};

// Gaussian identity-link mixed model with one random intercept per cluster,
// fitted by restricted maximum likelihood. The REML criterion is profiled
// down to the variance ratio lambda = sigma2_u / sigma2_e and minimised over
// log(lambda) with a grid scan, Brent refinement (tolerance 1e-10) and a
// final bisection polish on the analytic gradient; fixed effects follow by
// GLS. A boundary optimum reports sigma2_u = 0.
LmmFit fit_lmm_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<int>& cluster,
                    const std::vector<std::string>& names = {});

// Profiled criterion (-2 restricted log-likelihood, constants dropped) and
// its analytic derivative with respect to the log variance ratio. Exposed so
// the optimum can be audited against independent probes.
double reml_criterion(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<int>& cluster,
                      double log_ratio);
double reml_criterion_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<int>& cluster,
                               double log_ratio);

struct AdjustedDifference {
  double mean_control = 0.0;
  double mean_intervention = 0.0;
  double difference = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double complete_df = 0.0;  // residual degrees of freedom of the fit
};

// Adjusted means by marginal standardisation: every patient is predicted
// under both arm assignments at their observed covariates and the
// predictions averaged. With an identity link the difference equals the arm
// coefficient; the per-dataset CI uses normal quantiles.
AdjustedDifference adjusted_difference(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                                       const Eigen::MatrixXd& beta_cov, size_t arm_column, double complete_df);

}  // namespace cea::estimation
