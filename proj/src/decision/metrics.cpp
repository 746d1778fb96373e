#include "decision/metrics.hpp"

#include <cmath>

#include "util/csv.hpp"
#include "util/error.hpp"

namespace cea::decision {

IcerResult icer(double delta_cost, double delta_effect) {
  if (!std::isfinite(delta_cost) || !std::isfinite(delta_effect)) {
    throw validation_error("icer: inputs must be finite");
  }
  IcerResult out;
  if (delta_effect == 0.0) {
    out.label = "Undefined (dE=0)";
  } else if (delta_cost < 0.0 && delta_effect > 0.0) {
    out.label = "Dominant";
  } else if (delta_cost > 0.0 && delta_effect < 0.0) {
    out.label = "Dominated";
  } else {
    out.value = delta_cost / delta_effect;
    out.label = CsvWriter::format(*out.value);
  }
  return out;
}

double nhb(double delta_cost, double delta_effect, double lambda) {
  if (!(lambda > 0.0)) throw validation_error("nhb: threshold must be positive");
  return delta_effect - delta_cost / lambda;
}

double nmb(double delta_cost, double delta_effect, double lambda) {
  if (!(lambda > 0.0)) throw validation_error("nmb: threshold must be positive");
  return lambda * delta_effect - delta_cost;
}

}  // namespace cea::decision
