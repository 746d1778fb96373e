#include "uncertainty/bootstrap.hpp"

#include <atomic>
#include <map>

#include "estimation/lmm.hpp"
#include "estimation/sur.hpp"
#include "util/error.hpp"
#include "util/parallel.hpp"
#include "util/rng.hpp"

namespace cea::uncertainty {

using estimation::AnalysisRow;

std::vector<CePoint> cluster_bootstrap(const std::vector<AnalysisRow>& rows, size_t replicates, uint64_t seed,
                                       BootstrapEstimator estimator, size_t workers) {
  if (replicates < 1) throw validation_error("cluster_bootstrap: at least 1 replicate required");

  // Ward groups per arm, in deterministic (cluster id) order.
  std::map<int, std::vector<size_t>> by_ward_intervention, by_ward_control;
  for (size_t i = 0; i < rows.size(); ++i) {
    auto& dest = rows[i].arm > 0.5 ? by_ward_intervention : by_ward_control;
    dest[rows[i].cluster].push_back(i);
  }
  if (by_ward_intervention.size() < 2 || by_ward_control.size() < 2) {
    throw validation_error("cluster_bootstrap: at least 2 wards per arm required");
  }
  std::vector<const std::vector<size_t>*> wards_int, wards_ctl;
  for (const auto& [id, idx] : by_ward_intervention) wards_int.push_back(&idx);
  for (const auto& [id, idx] : by_ward_control) wards_ctl.push_back(&idx);

  std::vector<CePoint> out(replicates);
  std::atomic<size_t> redraws{0};
  const size_t redraw_cap = 10 * replicates;

  parallel_for(replicates, workers, [&](size_t b) {
    Rng rng(derive_seed(seed, "bootstrap-replicate", {b + 1}));
    for (;;) {
      std::vector<AnalysisRow> sample;
      sample.reserve(rows.size());
      int label = 0;
      for (const auto* wards : {&wards_int, &wards_ctl}) {
        for (size_t k = 0; k < wards->size(); ++k) {
          const auto& ward_rows = *(*wards)[rng.uniform_int(wards->size())];
          for (size_t i : ward_rows) {
            AnalysisRow r = rows[i];
            r.cluster = label;  // duplicated wards count as distinct clusters
            sample.push_back(r);
          }
          ++label;
        }
      }
      try {
        const auto dc = estimation::build_design(sample, estimation::Endpoint::cost);
        const auto dq = estimation::build_design(sample, estimation::Endpoint::qaly);
        if (estimator == BootstrapEstimator::lmm) {
          const auto fc = estimation::fit_lmm_reml(dc.y, dc.X, dc.cluster, dc.names);
          const auto fq = estimation::fit_lmm_reml(dq.y, dq.X, dq.cluster, dq.names);
          out[b] = {fc.beta[static_cast<Eigen::Index>(dc.arm_column)],
                    fq.beta[static_cast<Eigen::Index>(dq.arm_column)]};
        } else {
          const auto fit = estimation::fit_sur(dc, dq);
          out[b] = {fit.beta_cost()[static_cast<Eigen::Index>(dc.arm_column)],
                    fit.beta_qaly()[static_cast<Eigen::Index>(dq.arm_column)]};
        }
        return;
      } catch (const Error&) {
        if (redraws.fetch_add(1) + 1 > redraw_cap) {
          throw convergence_error("cluster_bootstrap: redraw budget exhausted (" + std::to_string(redraw_cap) +
                                  " redraws); designs repeatedly singular");
        }
      }
    }
  });
  return out;
}

CeCloud pool_clouds(const std::vector<std::vector<CePoint>>& per_imputation, uint64_t master_seed) {
  if (per_imputation.empty()) throw validation_error("pool_clouds: no clouds supplied");
  const size_t b = per_imputation.front().size();
  for (const auto& cloud : per_imputation) {
    if (cloud.size() != b) {
      throw validation_error("pool_clouds: ragged input; every imputation must contribute the same replicate count");
    }
  }
  CeCloud out;
  out.m = per_imputation.size();
  out.b = b;
  out.master_seed = master_seed;
  out.points.reserve(out.m * out.b);
  for (size_t m = 0; m < per_imputation.size(); ++m) {
    for (size_t i = 0; i < b; ++i) {
      out.points.push_back({m + 1, i + 1, per_imputation[m][i].delta_e, per_imputation[m][i].delta_c});
    }
  }
  return out;
}

}  // namespace cea::uncertainty
