#include "estimation/sur.hpp"

#include <map>

#include "util/error.hpp"

namespace cea::estimation {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

SurFit fit_sur(const Design& cost, const Design& qaly) {
  const auto n = cost.X.rows();
  if (qaly.X.rows() != n || cost.cluster != qaly.cluster) {
    throw validation_error("fit_sur: equations must share rows and clusters");
  }
  const auto p1 = cost.X.cols();
  const auto p2 = qaly.X.cols();
  const auto p = p1 + p2;

  auto ols = [](const MatrixXd& X, const VectorXd& y) -> VectorXd {
    Eigen::LLT<MatrixXd> llt(X.transpose() * X);
    if (llt.info() != Eigen::Success) throw validation_error("fit_sur: singular design");
    return llt.solve(X.transpose() * y);
  };

  VectorXd beta(p);
  beta.head(p1) = ols(cost.X, cost.y);
  beta.tail(p2) = ols(qaly.X, qaly.y);

  Matrix2d sigma = Matrix2d::Identity();
  Eigen::LLT<MatrixXd> joint_llt;
  int iterations = 0;
  for (int it = 0; it < 50; ++it) {
    ++iterations;
    const VectorXd e1 = cost.y - cost.X * beta.head(p1);
    const VectorXd e2 = qaly.y - qaly.X * beta.tail(p2);
    sigma(0, 0) = e1.squaredNorm() / static_cast<double>(n);
    sigma(1, 1) = e2.squaredNorm() / static_cast<double>(n);
    sigma(0, 1) = sigma(1, 0) = e1.dot(e2) / static_cast<double>(n);

    Matrix2d w = sigma.inverse();  // 2x2
    if (!w.allFinite()) throw validation_error("fit_sur: singular residual covariance");

    MatrixXd A(p, p);
    A.topLeftCorner(p1, p1) = w(0, 0) * (cost.X.transpose() * cost.X);
    A.topRightCorner(p1, p2) = w(0, 1) * (cost.X.transpose() * qaly.X);
    A.bottomLeftCorner(p2, p1) = w(1, 0) * (qaly.X.transpose() * cost.X);
    A.bottomRightCorner(p2, p2) = w(1, 1) * (qaly.X.transpose() * qaly.X);
    VectorXd rhs(p);
    rhs.head(p1) = w(0, 0) * (cost.X.transpose() * cost.y) + w(0, 1) * (cost.X.transpose() * qaly.y);
    rhs.tail(p2) = w(1, 0) * (qaly.X.transpose() * cost.y) + w(1, 1) * (qaly.X.transpose() * qaly.y);

    joint_llt.compute(A);
    if (joint_llt.info() != Eigen::Success) throw validation_error("fit_sur: singular stacked system");
    const VectorXd next = joint_llt.solve(rhs);
    const double delta = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    if (delta < 1e-8) break;
  }

  // Cluster-robust sandwich: bread from the final GLS information, meat from
  // ward-level score sums.
  const VectorXd e1 = cost.y - cost.X * beta.head(p1);
  const VectorXd e2 = qaly.y - qaly.X * beta.tail(p2);
  const Matrix2d w = sigma.inverse();

  std::map<int, VectorXd> scores;
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd u(p);
    u.head(p1) = cost.X.row(i).transpose() * (w(0, 0) * e1[i] + w(0, 1) * e2[i]);
    u.tail(p2) = qaly.X.row(i).transpose() * (w(1, 0) * e1[i] + w(1, 1) * e2[i]);
    auto [it, inserted] = scores.try_emplace(cost.cluster[static_cast<size_t>(i)], VectorXd::Zero(p));
    it->second += u;
  }
  MatrixXd meat = MatrixXd::Zero(p, p);
  for (const auto& [id, m] : scores) meat += m * m.transpose();

  const MatrixXd bread = joint_llt.solve(MatrixXd::Identity(p, p));

  SurFit fit;
  fit.names = cost.names;
  for (const auto& nm : qaly.names) fit.names.push_back("qaly:" + nm);
  fit.beta = beta;
  fit.vcov = bread * meat * bread;
  fit.residual_cov = sigma;
  fit.p_cost = static_cast<size_t>(p1);
  fit.p_qaly = static_cast<size_t>(p2);
  fit.n = static_cast<size_t>(n);
  fit.n_clusters = scores.size();
  fit.iterations = iterations;
  return fit;
}

}  // namespace cea::estimation
