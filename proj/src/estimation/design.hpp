#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cea::estimation {

// One completed patient, reduced to the endpoints and model covariates.
struct AnalysisRow {
  double cost = 0.0;
  double qaly = 0.0;
  double arm = 0.0;  // 1 = intervention
  double sex = 0.0;
  double ward_specialty = 0.0;
  double ward_readm_rate = 0.0;
  double ward_pct_over_75 = 0.0;
  double baseline_utility = 0.0;
  int cluster = 0;  // ward label; bootstrap replicates relabel draws
};

enum class Endpoint { cost, qaly };

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<int> cluster;
  std::vector<std::string> names;
  size_t arm_column = 1;
};

// Cost equation: arm, ward specialty, ward baseline readmission rate, ward
// share over 75, sex. The QALY equation additionally adjusts for baseline
// EQ-5D.
Design build_design(const std::vector<AnalysisRow>& rows, Endpoint endpoint);

}  // namespace cea::estimation
