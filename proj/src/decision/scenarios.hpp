#pragma once

#include <vector>

#include "missing/mice.hpp"

namespace cea::decision {

// Pattern-mixture sensitivity scenario: multiplicative factors applied to
// the chained-equation-imputed utilities per arm. Scenario 1 keeps the
// missing-at-random base case.
struct MnarScenario {
  int id = 1;
  double c_control = 1.0;
  double c_intervention = 1.0;
};

// The seven-scenario sweep over factors 1.00 / 0.95 / 0.90.
std::vector<MnarScenario> scenario_table();

// Rescale the imputed follow-up utilities of every dataset by the arm's
// factor. Observed values, baseline imputations, structural zeros and all
// cost cells are untouched; the mask is preserved.
missing::ImputedSets apply_mnar_rescale(const missing::ImputedSets& imputed, const MnarScenario& scenario);

}  // namespace cea::decision
