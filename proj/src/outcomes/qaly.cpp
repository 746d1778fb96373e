#include "outcomes/qaly.hpp"

#include <vector>

#include "util/error.hpp"

namespace cea::outcomes {

double qaly_auc(const UtilityTrajectory& traj) {
  if (traj.death_day && (*traj.death_day < 0 || *traj.death_day > 90)) {
    throw validation_error("qaly_auc: death_day must be in [0, 90]");
  }

  // Piecewise-linear utility path over [0, 90].
  std::vector<std::pair<double, double>> path;
  if (traj.death_day) {
    const double d = static_cast<double>(*traj.death_day);
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      if (trial::kTimepointDays[t] < d) {
        path.emplace_back(trial::kTimepointDays[t], traj.utilities[t]);
      }
    }
    path.emplace_back(d, 0.0);      // taper reaches zero at death
    if (d < 90.0) path.emplace_back(90.0, 0.0);
  } else {
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      path.emplace_back(trial::kTimepointDays[t], traj.utilities[t]);
    }
  }

  double area = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    const double dt = path[i].first - path[i - 1].first;
    area += 0.5 * (path[i].second + path[i - 1].second) * dt;
  }
  return area / 365.0;
}

}  // namespace cea::outcomes
