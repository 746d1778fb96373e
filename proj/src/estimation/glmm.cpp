#include "estimation/glmm.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "util/error.hpp"

namespace cea::estimation {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch: eigen-decomposition of the Jacobi matrix for the Hermite
  // recurrence. Weights are mu0 * (first eigenvector component)^2 with
  // mu0 = integral of exp(-x^2) = sqrt(pi).
  MatrixXd J = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(i / 2.0);
    J(i - 1, i) = b;
    J(i, i - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

namespace {

constexpr double kSigmaZeroLog = -6.0;  // below this, sigma_u is treated as 0

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct FamilyOps {
  GlmmFamily family;
  double shape = 1.0;  // gamma only

  double loglik(double y, double eta) const {
    if (family == GlmmFamily::bernoulli_logit) {
      return y * eta - softplus(eta);
    }
    const double a = shape;
    return a * (std::log(a) - eta) - a * y * std::exp(-eta) + (a - 1.0) * std::log(y) - std::lgamma(a);
  }
  double dloglik(double y, double eta) const {
    if (family == GlmmFamily::bernoulli_logit) {
      return y - 1.0 / (1.0 + std::exp(-eta));
    }
    return -shape + shape * y * std::exp(-eta);
  }
  double d2loglik(double y, double eta) const {
    if (family == GlmmFamily::bernoulli_logit) {
      const double p = 1.0 / (1.0 + std::exp(-eta));
      return -p * (1.0 - p);
    }
    return -shape * y * std::exp(-eta);
  }
};

struct Grouping {
  std::vector<std::vector<int>> rows;  // rows per cluster
};

Grouping group_rows(const std::vector<int>& cluster) {
  std::map<int, std::vector<int>> by_id;
  for (size_t i = 0; i < cluster.size(); ++i) by_id[cluster[i]].push_back(static_cast<int>(i));
  Grouping g;
  g.rows.reserve(by_id.size());
  for (auto& [id, rows] : by_id) g.rows.push_back(std::move(rows));
  return g;
}

// Marginal log-likelihood via mode-centred Gauss-Hermite quadrature.
double marginal_loglik(const MatrixXd& X, const VectorXd& y, const Grouping& g, const FamilyOps& fam, double sigma,
                       const VectorXd& beta, const std::vector<double>& nodes, const std::vector<double>& weights) {
  const VectorXd xb = X * beta;

  if (sigma < std::exp(kSigmaZeroLog)) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += fam.loglik(y[i], xb[i]);
    return ll;
  }

  const double inv_s2 = 1.0 / (sigma * sigma);
  double total = 0.0;
  for (const auto& rows : g.rows) {
    // Conditional mode of the random intercept by damped Newton.
    double u = 0.0;
    double h2 = -inv_s2;
    for (int it = 0; it < 60; ++it) {
      double h1 = -u * inv_s2;
      h2 = -inv_s2;
      for (int r : rows) {
        h1 += fam.dloglik(y[r], xb[r] + u);
        h2 += fam.d2loglik(y[r], xb[r] + u);
      }
      double step = -h1 / h2;
      step = std::clamp(step, -10.0, 10.0);
      u += step;
      if (std::fabs(step) < 1e-12 * (1.0 + std::fabs(u))) break;
    }
    const double tau = 1.0 / std::sqrt(-h2);

    auto h_at = [&](double uu) {
      double h = -0.5 * uu * uu * inv_s2;
      for (int r : rows) h += fam.loglik(y[r], xb[r] + uu);
      return h;
    };

    // log integral = log(sqrt(2) tau) + LSE_k[log w_k + xi_k^2 + h(mode + sqrt(2) tau xi_k)]
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(nodes.size());
    for (size_t k = 0; k < nodes.size(); ++k) {
      const double uu = u + std::numbers::sqrt2 * tau * nodes[k];
      terms[k] = std::log(weights[k]) + nodes[k] * nodes[k] + h_at(uu);
      max_term = std::max(max_term, terms[k]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    const double log_integral = std::log(std::numbers::sqrt2 * tau) + max_term + std::log(sum);
    total += log_integral - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
  }
  return total;
}

// Plain GLM Newton iterations used only to warm-start the fixed effects.
VectorXd glm_start(const MatrixXd& X, const VectorXd& y, const FamilyOps& fam) {
  VectorXd beta = VectorXd::Zero(X.cols());
  if (fam.family == GlmmFamily::gamma_log) {
    // Log-scale least squares is a decent starting point.
    VectorXd ly = y.array().log();
    beta = (X.transpose() * X).ldlt().solve(X.transpose() * ly);
    return beta;
  }
  for (int it = 0; it < 25; ++it) {
    const VectorXd eta = X * beta;
    VectorXd w(y.size()), z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-eta[i]));
      const double v = std::max(p * (1.0 - p), 1e-10);
      w[i] = v;
      z[i] = eta[i] + (y[i] - p) / v;
    }
    const MatrixXd Xw = X.array().colwise() * w.array();
    VectorXd next = (Xw.transpose() * X).ldlt().solve(Xw.transpose() * z);
    if ((next - beta).lpNorm<Eigen::Infinity>() < 1e-10) {
      beta = next;
      break;
    }
    beta = next;
  }
  return beta;
}

}  // namespace

GlmmFit fit_glmm_aghq(const MatrixXd& X, const VectorXd& y, const std::vector<int>& cluster,
                      const std::vector<std::string>& column_names, GlmmFamily family, int quad_points,
                      int max_iter) {
  if (X.rows() != y.size() || static_cast<size_t>(X.rows()) != cluster.size()) {
    throw validation_error("fit_glmm_aghq: rows of X, y and cluster must align");
  }
  if (family == GlmmFamily::gamma_log && (y.array() <= 0.0).any()) {
    throw validation_error("fit_glmm_aghq: gamma-log family requires strictly positive responses");
  }
  const Grouping grouping = group_rows(cluster);
  if (grouping.rows.size() < 2) throw validation_error("fit_glmm_aghq: at least 2 clusters required");

  std::vector<double> nodes, weights;
  gauss_hermite(quad_points, nodes, weights);

  const int p = static_cast<int>(X.cols());
  const bool has_shape = family == GlmmFamily::gamma_log;
  const int dim = p + 1 + (has_shape ? 1 : 0);

  // theta = [beta; log sigma_u; (log shape)]
  auto unpack = [&](const VectorXd& theta, FamilyOps& fam, double& sigma, VectorXd& beta) {
    beta = theta.head(p);
    sigma = std::exp(std::clamp(theta[p], -30.0, 5.0));
    fam.family = family;
    fam.shape = has_shape ? std::exp(std::clamp(theta[p + 1], -5.0, 10.0)) : 1.0;
  };
  auto objective = [&](const VectorXd& theta) {
    FamilyOps fam;
    double sigma;
    VectorXd beta;
    unpack(theta, fam, sigma, beta);
    return marginal_loglik(X, y, grouping, fam, sigma, beta, nodes, weights);
  };
  auto gradient = [&](const VectorXd& theta) {
    VectorXd g(dim);
    for (int i = 0; i < dim; ++i) {
      const double h = 1e-5 * std::max(1.0, std::fabs(theta[i]));
      VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      g[i] = (objective(tp) - objective(tm)) / (2.0 * h);
    }
    return g;
  };

  VectorXd theta(dim);
  {
    FamilyOps fam0{family, 1.0};
    theta.head(p) = glm_start(X, y, fam0);
    theta[p] = std::log(0.3);
    if (has_shape) theta[p + 1] = 0.0;
  }

  // BFGS on the negative marginal log-likelihood.
  auto neg = [&](const VectorXd& t) { return -objective(t); };
  auto neg_grad = [&](const VectorXd& t) { return VectorXd(-gradient(t)); };

  MatrixXd H = MatrixXd::Identity(dim, dim);  // inverse-Hessian approximation
  double f = neg(theta);
  VectorXd g = neg_grad(theta);
  bool converged = false;
  int iter = 0;
  const double grad_tol = 1e-4;
  for (; iter < max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
      converged = true;
      break;
    }
    VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // not a descent direction; reset
      H = MatrixXd::Identity(dim, dim);
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    double f_new = f;
    VectorXd theta_new = theta;
    bool improved = false;
    for (int ls = 0; ls < 50; ++ls) {
      theta_new = theta + step * dir;
      f_new = neg(theta_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // Flat to machine precision along the search direction.
      converged = g.lpNorm<Eigen::Infinity>() < 10.0 * grad_tol;
      break;
    }
    const VectorXd g_new = neg_grad(theta_new);
    const VectorXd s = theta_new - theta;
    const VectorXd yk = g_new - g;
    const double sy = s.dot(yk);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const MatrixXd I = MatrixXd::Identity(dim, dim);
      H = (I - rho * s * yk.transpose()) * H * (I - rho * yk * s.transpose()) + rho * s * s.transpose();
    }
    theta = theta_new;
    f = f_new;
    g = g_new;
  }
  const double final_loglik = -f;

  GlmmFit fit;
  fit.column_names = column_names;
  fit.iterations = iter;
  fit.converged = converged;
  fit.last_iterate = theta;
  fit.loglik = final_loglik;
  {
    FamilyOps fam;
    double sigma;
    VectorXd beta;
    unpack(theta, fam, sigma, beta);
    fit.beta = beta;
    fit.sigma_u = sigma;
    fit.shape = has_shape ? fam.shape : 0.0;
    fit.boundary_sigma_zero = theta[p] < kSigmaZeroLog;
    if (fit.boundary_sigma_zero) fit.sigma_u = 0.0;
  }
  if (!converged) return fit;  // caller decides how to report

  // Observed information by central second differences; at a sigma boundary
  // the log-sigma direction is flat, so it is excluded from the block.
  std::vector<int> free_idx;
  for (int i = 0; i < p; ++i) free_idx.push_back(i);
  if (!fit.boundary_sigma_zero) free_idx.push_back(p);
  if (has_shape) free_idx.push_back(p + 1);
  const int k = static_cast<int>(free_idx.size());
  MatrixXd hess(k, k);
  std::vector<double> hs(k);
  for (int i = 0; i < k; ++i) hs[i] = 1e-4 * std::max(1.0, std::fabs(theta[free_idx[i]]));
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
      tpp[free_idx[i]] += hs[i];
      tpp[free_idx[j]] += hs[j];
      tpm[free_idx[i]] += hs[i];
      tpm[free_idx[j]] -= hs[j];
      tmp[free_idx[i]] -= hs[i];
      tmp[free_idx[j]] += hs[j];
      tmm[free_idx[i]] -= hs[i];
      tmm[free_idx[j]] -= hs[j];
      const double v = (objective(tpp) - objective(tpm) - objective(tmp) + objective(tmm)) / (4.0 * hs[i] * hs[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  const MatrixXd info = -hess;
  Eigen::FullPivLU<MatrixXd> lu(info);
  fit.se.assign(p, std::numeric_limits<double>::quiet_NaN());
  fit.z.assign(p, std::numeric_limits<double>::quiet_NaN());
  if (lu.isInvertible()) {
    const MatrixXd cov = lu.inverse();
    for (int i = 0; i < p; ++i) {
      const double v = cov(i, i);
      if (v > 0.0) {
        fit.se[i] = std::sqrt(v);
        fit.z[i] = fit.beta[i] / fit.se[i];
      }
    }
    if (!fit.boundary_sigma_zero) {
      const int pos = p;  // log sigma is the (p+1)-th free parameter when present
      int where = -1;
      for (int i = 0; i < k; ++i) {
        if (free_idx[i] == pos) where = i;
      }
      if (where >= 0 && cov(where, where) > 0.0) {
        fit.sigma_u_var = cov(where, where) * fit.sigma_u * fit.sigma_u;  // delta method
      }
    }
  }
  return fit;
}

}  // namespace cea::estimation
