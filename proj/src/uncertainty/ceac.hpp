#pragma once

#include <span>
#include <string>
#include <vector>

#include "uncertainty/bootstrap.hpp"

namespace cea::uncertainty {

struct Ceac {
  std::vector<double> thresholds;
  std::vector<double> probability;  // P(lambda * dE - dC > 0) over the cloud
};

// Probability of cost-effectiveness at each threshold, computed pointwise
// over the pooled bootstrap cloud. No monotonicity is implied.
Ceac compute_ceac(const CeCloud& cloud, std::span<const double> thresholds);

// Strictly increasing grid from min to max by step, with the given values
// spliced in.
std::vector<double> threshold_grid(double min, double max, double step, std::span<const double> always_include);

struct QuadrantShares {
  double ne = 0.0;  // dE > 0, dC >= 0
  double nw = 0.0;  // dE <= 0, dC >= 0
  double se = 0.0;  // dE > 0, dC < 0 (dominant)
  double sw = 0.0;  // dE <= 0, dC < 0
};

QuadrantShares quadrant_shares(const CeCloud& cloud);

// CSV of (scenario, m, b, delta_e, delta_c) plus a JSON sidecar with the
// quadrant shares.
void ce_plane_export(const CeCloud& cloud, int scenario_id, const std::string& csv_path,
                     const std::string& sidecar_json_path);

std::string ce_plane_csv(const std::vector<std::pair<int, const CeCloud*>>& scenarios);
std::string ceac_csv(const Ceac& ceac);

}  // namespace cea::uncertainty
