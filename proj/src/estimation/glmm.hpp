#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cea::estimation {

enum class GlmmFamily { bernoulli_logit, gamma_log };

struct GlmmFit {
  std::vector<std::string> column_names;
  Eigen::VectorXd beta;
  std::vector<double> se;
  std::vector<double> z;
  double sigma_u = 0.0;        // random-intercept SD
  double sigma_u_var = 0.0;    // variance of sigma_u estimate (delta method)
  double shape = 0.0;          // gamma family only
  double loglik = 0.0;
  bool converged = false;
  bool boundary_sigma_zero = false;
  int iterations = 0;
  Eigen::VectorXd last_iterate;  // packed parameters, reported on failure
};

// Random-intercept generalised linear mixed model fitted by maximising the
// adaptive Gauss-Hermite marginal likelihood (mode-centred quadrature) with
// BFGS over (beta, log sigma_u[, log shape]). Gradients and the information
// matrix come from central finite differences of the quadrature-evaluated
// likelihood. Throws a convergence error carrying the last iterate when the
// iteration cap is hit.
GlmmFit fit_glmm_aghq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& cluster,
                      const std::vector<std::string>& column_names, GlmmFamily family, int quad_points = 15,
                      int max_iter = 200);

// Gauss-Hermite nodes and weights for the weight function exp(-x^2),
// computed by the Golub-Welsch eigenvalue method.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace cea::estimation
