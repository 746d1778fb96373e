#pragma once

#include <cstdint>
#include <vector>

#include "estimation/design.hpp"

namespace cea::uncertainty {

enum class BootstrapEstimator { lmm, sur };

struct CePoint {
  double delta_c = 0.0;
  double delta_e = 0.0;
};

// Non-parametric cluster bootstrap on one completed dataset: wards are
// resampled with replacement within arm (per-arm ward counts preserved),
// their patients reconstituted with fresh cluster labels per draw, and the
// adjusted-difference models refitted. A resample with a singular design is
// redrawn; redraws beyond 10x the replicate count abort. Deterministic for a
// given seed and independent of the worker count.
std::vector<CePoint> cluster_bootstrap(const std::vector<estimation::AnalysisRow>& rows, size_t replicates,
                                       uint64_t seed, BootstrapEstimator estimator, size_t workers = 1);

struct TaggedPoint {
  size_t imputation = 0;  // 1-based
  size_t replicate = 0;   // 1-based
  double delta_e = 0.0;
  double delta_c = 0.0;
};

struct CeCloud {
  std::vector<TaggedPoint> points;  // size M x B
  size_t m = 0;
  size_t b = 0;
  uint64_t master_seed = 0;
};

// Concatenates per-imputation bootstrap clouds; every imputation must have
// contributed the same number of replicates.
CeCloud pool_clouds(const std::vector<std::vector<CePoint>>& per_imputation, uint64_t master_seed);

}  // namespace cea::uncertainty
