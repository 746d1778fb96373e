#include "uncertainty/rubin.hpp"

#include <cmath>
#include <limits>

#include "util/error.hpp"
#include "util/num.hpp"

namespace cea::uncertainty {

double barnard_rubin_df(size_t m, double within, double between, double complete_df) {
  const double mm = static_cast<double>(m);
  const double extra = (1.0 + 1.0 / mm) * between;
  const double total = within + extra;
  // Fraction of missing information.
  const double lambda = total > 0.0 ? extra / total : 0.0;
  const double nu_obs = (complete_df + 1.0) / (complete_df + 3.0) * complete_df * (1.0 - lambda);
  if (lambda <= 0.0) return nu_obs;
  const double nu_old = (mm - 1.0) / (lambda * lambda);
  return nu_old * nu_obs / (nu_old + nu_obs);
}

PooledEstimate rubin_pool(std::span<const double> estimates, std::span<const double> variances, double complete_df,
                          double level) {
  if (estimates.size() < 2) throw validation_error("rubin_pool: at least 2 imputations required");
  if (estimates.size() != variances.size()) throw validation_error("rubin_pool: estimates/variances length mismatch");
  for (double v : variances) {
    if (v < 0.0) throw validation_error("rubin_pool: negative variance");
  }
  if (!(complete_df > 0.0)) throw validation_error("rubin_pool: complete_df must be positive");

  PooledEstimate out;
  out.m = estimates.size();
  out.point = mean(estimates);
  out.within_variance = mean(variances);
  out.between_variance = sample_variance(estimates);
  out.total_variance =
      out.within_variance + (1.0 + 1.0 / static_cast<double>(out.m)) * out.between_variance;
  out.se = std::sqrt(out.total_variance);
  out.df = barnard_rubin_df(out.m, out.within_variance, out.between_variance, complete_df);
  const double q = student_t_quantile(0.5 + level / 2.0, std::max(out.df, 1e-3));
  out.ci_lower = out.point - q * out.se;
  out.ci_upper = out.point + q * out.se;
  return out;
}

}  // namespace cea::uncertainty
