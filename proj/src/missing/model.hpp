#pragma once

#include "estimation/glmm.hpp"
#include "trial/types.hpp"

namespace cea::missing {

struct MissingnessModelFit {
  int timepoint_day = 0;
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  std::vector<double> se;
  std::vector<double> z;
  double cluster_variance = 0.0;  // ward random-intercept variance
  double loglik = 0.0;
  size_t n = 0;
};

// Random-intercept (ward) logistic regression of the EQ-5D missingness
// indicator at 10, 30 or 90 days on arm, baseline EQ-5D, ward specialty,
// ward baseline readmission rate, ward share over 75 and sex, fitted by
// adaptive Gauss-Hermite quadrature. Baseline values must be completed
// first. Throws a convergence error carrying the last iterate if the
// optimiser hits its iteration cap.
MissingnessModelFit fit_missingness_model(const trial::MergedDataset& merged, int timepoint_day,
                                          int quad_points = 15, int max_iter = 200);

}  // namespace cea::missing
