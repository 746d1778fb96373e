#pragma once

#include <span>

namespace cea::uncertainty {

struct PooledEstimate {
  double point = 0.0;
  double within_variance = 0.0;   // W
  double between_variance = 0.0;  // B
  double total_variance = 0.0;    // T = W + (1 + 1/M) B
  double se = 0.0;
  double df = 0.0;                // Barnard-Rubin adjusted degrees of freedom
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  size_t m = 0;
};

// Rubin's rules across M imputations with the Barnard-Rubin small-sample
// degrees-of-freedom adjustment; the CI uses the t quantile at those df.
PooledEstimate rubin_pool(std::span<const double> estimates, std::span<const double> variances, double complete_df,
                          double level = 0.95);

double barnard_rubin_df(size_t m, double within, double between, double complete_df);

}  // namespace cea::uncertainty
