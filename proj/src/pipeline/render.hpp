#pragma once

#include <string>
#include <vector>

#include "missing/model.hpp"
#include "missing/profile.hpp"
#include "pipeline/analysis.hpp"
#include "trial/types.hpp"

namespace cea::pipeline {

std::string render_baseline_table(const trial::BaselineTable& table);
std::string render_missing_report(const missing::MissingnessReport& report,
                                  const std::vector<missing::MissingnessModelFit>& model_fits);
std::string render_analysis_table(const AnalysisResult& result);
std::string render_scenario_table(const std::vector<ScenarioResult>& scenarios, double primary_threshold);

// Minimal static SVG renderers for the figure data.
std::string ce_plane_svg(const uncertainty::CeCloud& cloud, const std::string& title);
std::string ceac_svg(const uncertainty::Ceac& ceac, const std::string& title);

}  // namespace cea::pipeline
