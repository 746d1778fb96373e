#include "estimation/design.hpp"

#include "util/error.hpp"

namespace cea::estimation {

Design build_design(const std::vector<AnalysisRow>& rows, Endpoint endpoint) {
  if (rows.empty()) throw validation_error("build_design: no rows");
  Design d;
  d.names = {"intercept", "arm", "ward_specialty", "ward_baseline_readm_rate", "ward_pct_over_75", "sex"};
  if (endpoint == Endpoint::qaly) d.names.push_back("eq5d_baseline");
  d.arm_column = 1;

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(d.names.size());
  d.X.resize(n, p);
  d.y.resize(n);
  d.cluster.resize(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    d.X(i, 0) = 1.0;
    d.X(i, 1) = r.arm;
    d.X(i, 2) = r.ward_specialty;
    d.X(i, 3) = r.ward_readm_rate;
    d.X(i, 4) = r.ward_pct_over_75;
    d.X(i, 5) = r.sex;
    if (endpoint == Endpoint::qaly) d.X(i, 6) = r.baseline_utility;
    d.y[i] = endpoint == Endpoint::cost ? r.cost : r.qaly;
    d.cluster[static_cast<size_t>(i)] = r.cluster;
  }
  return d;
}

}  // namespace cea::estimation
