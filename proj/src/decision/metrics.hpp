#pragma once

#include <optional>
#include <string>

namespace cea::decision {

struct IcerResult {
  std::optional<double> value;  // absent under dominance or dE = 0
  std::string label;            // "Dominant", "Dominated", "Undefined (dE=0)" or the ratio
};

// Incremental cost-effectiveness ratio with the dominance sign partition:
// cheaper and more effective is Dominant, dearer and less effective is
// Dominated, zero effect difference leaves the ratio undefined.
IcerResult icer(double delta_cost, double delta_effect);

// Net health benefit (QALYs) and net monetary benefit (GBP) at threshold
// lambda > 0; NMB == lambda * NHB identically.
double nhb(double delta_cost, double delta_effect, double lambda);
double nmb(double delta_cost, double delta_effect, double lambda);

}  // namespace cea::decision
