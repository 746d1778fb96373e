#pragma once

#include <array>
#include <optional>

#include "trial/types.hpp"

namespace cea::outcomes {

struct UtilityTrajectory {
  std::array<double, trial::kNumTimepoints> utilities{};  // days 0, 10, 30, 90
  std::optional<int> death_day;                           // 0..90
};

// Area under the utility curve over the 90-day follow-up, in years
// (trapezoidal rule, divided by 365). A death at day d replaces the curve
// from the last measurement strictly before d: it tapers linearly to zero at
// d and stays at zero afterwards.
double qaly_auc(const UtilityTrajectory& traj);

}  // namespace cea::outcomes
