#include "decision/scenarios.hpp"

#include "util/error.hpp"

namespace cea::decision {

std::vector<MnarScenario> scenario_table() {
  return {
      {1, 1.00, 1.00}, {2, 1.00, 0.95}, {3, 0.95, 1.00}, {4, 0.95, 0.95},
      {5, 0.95, 0.90}, {6, 0.90, 0.95}, {7, 0.90, 0.90},
  };
}

missing::ImputedSets apply_mnar_rescale(const missing::ImputedSets& imputed, const MnarScenario& scenario) {
  if (imputed.mask.patients() == 0) {
    throw validation_error("apply_mnar_rescale: provenance mask required to locate imputed cells");
  }
  missing::ImputedSets out = imputed;
  const auto cells = imputed.mask.cells_with(missing::CellFlag::imputed_mi);
  for (auto& dataset : out.datasets) {
    for (const auto& [patient, field] : cells) {
      // Only quality-of-life cells are rescaled; imputed resource or cost
      // cells stay missing-at-random in every scenario.
      if (field != "u10" && field != "u30" && field != "u90") continue;
      auto& p = dataset.patients[patient];
      const double factor = p.arm == trial::Arm::intervention ? scenario.c_intervention : scenario.c_control;
      const auto current = missing::get_field(p, field);
      if (!current) throw internal_error("apply_mnar_rescale: imputed cell is empty");
      missing::set_field(p, field, *current * factor);
    }
  }
  return out;
}

}  // namespace cea::decision
