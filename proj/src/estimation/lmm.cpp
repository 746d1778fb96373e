#include "estimation/lmm.hpp"

#include <cmath>
#include <map>

#include "util/error.hpp"

namespace cea::estimation {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kThetaMin = -25.0;  // log variance ratio search range
constexpr double kThetaMax = 10.0;

// Per-cluster sufficient statistics; the profiled criterion is O(q p^2) per
// evaluation once these are in place.
struct ClusterBlocks {
  std::vector<MatrixXd> XtX;
  std::vector<VectorXd> Xty;
  std::vector<VectorXd> s;  // X_j' 1
  std::vector<double> t;    // 1' y_j
  std::vector<double> yty;
  std::vector<double> n;
  size_t p = 0;
  size_t n_total = 0;
};

ClusterBlocks make_blocks(const VectorXd& y, const MatrixXd& X, const std::vector<int>& cluster) {
  if (X.rows() != y.size() || static_cast<size_t>(X.rows()) != cluster.size()) {
    throw validation_error("fit_lmm_reml: rows of y, X and cluster must align");
  }
  std::map<int, std::vector<int>> groups;
  for (size_t i = 0; i < cluster.size(); ++i) groups[cluster[i]].push_back(static_cast<int>(i));
  if (groups.size() < 2) throw validation_error("fit_lmm_reml: at least 2 clusters required");

  ClusterBlocks b;
  b.p = static_cast<size_t>(X.cols());
  b.n_total = static_cast<size_t>(X.rows());
  for (const auto& [id, rows] : groups) {
    MatrixXd Xj(rows.size(), X.cols());
    VectorXd yj(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
      Xj.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
      yj[static_cast<Eigen::Index>(k)] = y[rows[k]];
    }
    b.XtX.push_back(Xj.transpose() * Xj);
    b.Xty.push_back(Xj.transpose() * yj);
    b.s.push_back(Xj.colwise().sum().transpose());
    b.t.push_back(yj.sum());
    b.yty.push_back(yj.squaredNorm());
    b.n.push_back(static_cast<double>(rows.size()));
  }
  return b;
}

struct Profile {
  double criterion = 0.0;  // log|V| + log|X'V^-1 X| + (n-p) log Q
  double gradient = 0.0;   // d criterion / d log(lambda)
  VectorXd beta;
  double Q = 0.0;          // weighted residual sum of squares
  double logdet_V = 0.0;
  double logdet_A = 0.0;
};

Profile evaluate(const ClusterBlocks& b, double lambda) {
  const size_t q = b.XtX.size();
  const auto p = static_cast<Eigen::Index>(b.p);
  MatrixXd A = MatrixXd::Zero(p, p);
  VectorXd rhs = VectorXd::Zero(p);
  double logdet_V = 0.0;
  for (size_t j = 0; j < q; ++j) {
    const double denom = 1.0 + lambda * b.n[j];
    const double w = lambda / denom;
    A += b.XtX[j] - w * (b.s[j] * b.s[j].transpose());
    rhs += b.Xty[j] - w * b.s[j] * b.t[j];
    logdet_V += std::log(denom);
  }
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw validation_error("fit_lmm_reml: X'V^-1X not positive definite (rank-deficient design)");
  }

  Profile out;
  out.beta = llt.solve(rhs);
  out.logdet_V = logdet_V;
  out.logdet_A = 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();

  double Q = 0.0;
  double trVG = 0.0;     // tr(V^-1 G)
  double trAC = 0.0;     // sum_j c_j' A^-1 c_j
  double yPGPy = 0.0;    // sum_j (1' V_j^-1 r_j)^2
  for (size_t j = 0; j < q; ++j) {
    const double denom = 1.0 + lambda * b.n[j];
    const double w = lambda / denom;
    const double rtr = b.yty[j] - 2.0 * out.beta.dot(b.Xty[j]) + out.beta.dot(b.XtX[j] * out.beta);
    const double r1 = b.t[j] - b.s[j].dot(out.beta);  // 1' r_j
    Q += rtr - w * r1 * r1;
    trVG += b.n[j] / denom;
    const VectorXd c = b.s[j] / denom;
    trAC += c.dot(llt.solve(c));
    const double v1r = r1 / denom;
    yPGPy += v1r * v1r;
  }
  Q = std::max(Q, 1e-300);
  out.Q = Q;
  const double np = static_cast<double>(b.n_total - b.p);
  out.criterion = logdet_V + out.logdet_A + np * std::log(Q);
  const double dC_dlambda = trVG - trAC - np * yPGPy / Q;
  out.gradient = lambda * dC_dlambda;
  return out;
}

void check_rank(const MatrixXd& X, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank < X.cols()) {
    std::string msg = "rank-deficient design; collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = rank; i < X.cols(); ++i) {
      const auto col = static_cast<size_t>(perm[i]);
      msg += ' ';
      msg += col < names.size() ? names[col] : ("col" + std::to_string(col));
    }
    throw validation_error(msg);
  }
}

}  // namespace

double reml_criterion(const VectorXd& y, const MatrixXd& X, const std::vector<int>& cluster, double log_ratio) {
  const auto b = make_blocks(y, X, cluster);
  return evaluate(b, std::exp(log_ratio)).criterion;
}

double reml_criterion_gradient(const VectorXd& y, const MatrixXd& X, const std::vector<int>& cluster,
                               double log_ratio) {
  const auto b = make_blocks(y, X, cluster);
  return evaluate(b, std::exp(log_ratio)).gradient;
}

LmmFit fit_lmm_reml(const VectorXd& y, const MatrixXd& X, const std::vector<int>& cluster,
                    const std::vector<std::string>& names) {
  check_rank(X, names);
  const ClusterBlocks blocks = make_blocks(y, X, cluster);

  auto crit = [&](double theta) { return evaluate(blocks, std::exp(theta)).criterion; };
  auto grad = [&](double theta) { return evaluate(blocks, std::exp(theta)).gradient; };

  // Coarse scan, then Brent on the bracketing interval.
  double best_theta = kThetaMin;
  double best_c = crit(kThetaMin);
  for (double theta = kThetaMin + 1.0; theta <= kThetaMax + 1e-9; theta += 1.0) {
    const double c = crit(theta);
    if (c < best_c) {
      best_c = c;
      best_theta = theta;
    }
  }

  {
    // Brent minimisation on [a, b] with absolute tolerance 1e-10.
    double a = std::max(kThetaMin, best_theta - 1.0);
    double bb = std::min(kThetaMax, best_theta + 1.0);
    const double gold = 0.3819660112501051;
    double x = best_theta, w = best_theta, v = best_theta;
    double fx = best_c, fw = best_c, fv = best_c;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + bb);
      const double tol = 1e-10;
      if (std::fabs(x - m) <= 2.0 * tol - 0.5 * (bb - a)) break;
      double p = 0.0, q = 0.0, r = 0.0;
      bool parabolic = false;
      if (std::fabs(e) > tol) {
        r = (x - w) * (fx - fv);
        q = (x - v) * (fx - fw);
        p = (x - v) * q - (x - w) * r;
        q = 2.0 * (q - r);
        if (q > 0.0) p = -p;
        q = std::fabs(q);
        if (std::fabs(p) < std::fabs(0.5 * q * e) && p > q * (a - x) && p < q * (bb - x)) {
          e = d;
          d = p / q;
          parabolic = true;
        }
      }
      if (!parabolic) {
        e = (x < m) ? bb - x : a - x;
        d = gold * e;
      }
      const double u = x + ((std::fabs(d) >= tol) ? d : (d > 0 ? tol : -tol));
      const double fu = crit(u);
      if (fu <= fx) {
        if (u < x) {
          bb = x;
        } else {
          a = x;
        }
        v = w; fv = fw;
        w = x; fw = fx;
        x = u; fx = fu;
      } else {
        if (u < x) {
          a = u;
        } else {
          bb = u;
        }
        if (fu <= fw || w == x) {
          v = w; fv = fw;
          w = u; fw = fu;
        } else if (fu <= fv || v == x || v == w) {
          v = u; fv = fu;
        }
      }
    }
    best_theta = x;
    best_c = fx;
  }

  // Polish with bisection on the analytic gradient when a sign change
  // brackets the optimum; drives |dC/dtheta| to machine level.
  {
    double lo = std::max(kThetaMin, best_theta - 0.5);
    double hi = std::min(kThetaMax, best_theta + 0.5);
    double glo = grad(lo), ghi = grad(hi);
    if (glo < 0.0 && ghi > 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * std::max(1.0, std::fabs(mid))) break;
        const double gm = grad(mid);
        if (gm < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double polished = 0.5 * (lo + hi);
      if (crit(polished) <= best_c + 1e-9) best_theta = polished;
    }
  }

  // Boundary: no interior improvement over the zero-variance limit.
  const double c0 = evaluate(blocks, 0.0).criterion;
  const double c_opt = crit(best_theta);
  const bool boundary = best_theta <= kThetaMin + 1e-6 || c0 <= c_opt + 1e-10;

  const double lambda = boundary ? 0.0 : std::exp(best_theta);
  const Profile prof = evaluate(blocks, lambda);

  LmmFit fit;
  fit.names = names;
  fit.beta = prof.beta;
  fit.n = blocks.n_total;
  fit.p = blocks.p;
  fit.n_clusters = blocks.XtX.size();
  fit.boundary = boundary;
  fit.log_ratio = boundary ? -std::numeric_limits<double>::infinity() : best_theta;
  const double np = static_cast<double>(fit.n - fit.p);
  fit.sigma2_e = prof.Q / np;
  fit.sigma2_u = lambda * fit.sigma2_e;

  // Model covariance of the fixed effects: sigma2_e (X' V^-1 X)^-1.
  {
    MatrixXd A = MatrixXd::Zero(static_cast<Eigen::Index>(fit.p), static_cast<Eigen::Index>(fit.p));
    for (size_t j = 0; j < blocks.XtX.size(); ++j) {
      const double w = lambda / (1.0 + lambda * blocks.n[j]);
      A += blocks.XtX[j] - w * (blocks.s[j] * blocks.s[j].transpose());
    }
    fit.beta_cov = fit.sigma2_e * A.llt().solve(MatrixXd::Identity(A.rows(), A.cols()));
  }
  fit.reml_loglik =
      -0.5 * (np * std::log(2.0 * M_PI) + np + np * std::log(prof.Q / np) + prof.logdet_V + prof.logdet_A);
  return fit;
}

AdjustedDifference adjusted_difference(const MatrixXd& X, const VectorXd& beta, const MatrixXd& beta_cov,
                                       size_t arm_column, double complete_df) {
  MatrixXd X0 = X, X1 = X;
  X0.col(static_cast<Eigen::Index>(arm_column)).setZero();
  X1.col(static_cast<Eigen::Index>(arm_column)).setOnes();
  AdjustedDifference out;
  out.mean_control = (X0 * beta).mean();
  out.mean_intervention = (X1 * beta).mean();
  out.difference = out.mean_intervention - out.mean_control;
  out.se = std::sqrt(beta_cov(static_cast<Eigen::Index>(arm_column), static_cast<Eigen::Index>(arm_column)));
  const double zc = 1.959963984540054;
  out.ci_lower = out.difference - zc * out.se;
  out.ci_upper = out.difference + zc * out.se;
  out.complete_df = complete_df;
  return out;
}

}  // namespace cea::estimation
