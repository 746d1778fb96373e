#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "estimation/design.hpp"

namespace cea::estimation {

struct SurFit {
  std::vector<std::string> names;  // stacked: cost equation then qaly equation
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;            // cluster-robust sandwich
  Eigen::Matrix2d residual_cov;    // cross-equation residual covariance
  size_t p_cost = 0;
  size_t p_qaly = 0;
  size_t n = 0;
  size_t n_clusters = 0;
  int iterations = 0;

  Eigen::VectorXd beta_cost() const { return beta.head(static_cast<Eigen::Index>(p_cost)); }
  Eigen::VectorXd beta_qaly() const { return beta.tail(static_cast<Eigen::Index>(p_qaly)); }
};

// Two-equation seemingly unrelated regression by iterated feasible GLS:
// per-equation OLS seeds the residual covariance, the stacked GLS system is
// re-solved until coefficients move less than 1e-8 (at most 50 rounds).
// Coefficient covariance is the cluster-robust sandwich over wards with no
// small-sample factor, so singleton clusters reproduce the
// heteroskedasticity-robust estimator exactly.
SurFit fit_sur(const Design& cost, const Design& qaly);

}  // namespace cea::estimation
