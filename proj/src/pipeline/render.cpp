#include "pipeline/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "util/num.hpp"

namespace cea::pipeline {

namespace {

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lead(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string p_str(double p, bool defined) {
  if (!defined || std::isnan(p)) return "undefined";
  return fixed(p, 3);
}

}  // namespace

std::string render_baseline_table(const trial::BaselineTable& t) {
  std::ostringstream os;
  os << "Baseline characteristics\n";
  os << pad("", 34) << pad("Intervention", 16) << pad("Control", 16) << pad("Total", 16) << "p-value\n";
  os << pad("Patients / wards", 34) << pad(std::to_string(t.n_intervention) + " / " + std::to_string(t.wards_intervention), 16)
     << pad(std::to_string(t.n_control) + " / " + std::to_string(t.wards_control), 16)
     << pad(std::to_string(t.n_intervention + t.n_control), 16) << "\n";
  for (const auto& row : t.rows) {
    const int dp = row.binary ? 1 : row.variable == "eq5d_baseline" ? 2 : 1;
    auto cell = [&](double m, double sd) { return fixed(m, dp) + " (" + fixed(sd, dp) + ")"; };
    os << pad(row.variable, 34) << pad(cell(row.mean_intervention, row.sd_intervention), 16)
       << pad(cell(row.mean_control, row.sd_control), 16) << pad(cell(row.mean_total, row.sd_total), 16)
       << p_str(row.p_value, row.p_defined) << "\n";
  }
  return os.str();
}

std::string render_missing_report(const missing::MissingnessReport& report,
                                  const std::vector<missing::MissingnessModelFit>& model_fits) {
  std::ostringstream os;
  os << "Missing values (n = " << report.n_patients << ")\n";
  os << pad("variable", 30) << lead("missing", 9) << lead("total", 8) << lead("%", 9) << "\n";
  std::string group;
  for (const auto& v : report.variables) {
    if (v.group != group) {
      group = v.group;
      os << "[" << group << "]\n";
    }
    os << pad(v.variable, 30) << lead(std::to_string(v.missing), 9) << lead(std::to_string(v.total), 8)
       << lead(fixed(v.percent, 2), 9) << "\n";
  }
  os << "\nEQ-5D missingness by arm (base/10/30/90)\n";
  const char* arm_names[2] = {"intervention", "control"};
  for (size_t a = 0; a < 2; ++a) {
    os << pad(arm_names[a], 14) << "n=" << report.n_by_arm[a] << " missing:";
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) os << ' ' << report.eq5d_missing_by_arm[a][t];
    os << "\n";
  }
  os << "\nFollow-up response patterns (O observed, M missing; days 10/30/90)\n";
  for (const auto& [pattern, count] : report.patterns.counts) {
    os << pad(pattern, 8) << count << "\n";
  }
  os << "monotone " << report.patterns.monotone << ", non-monotone " << report.patterns.non_monotone << "\n";
  os << "incomplete cases: " << fixed(report.incomplete_case_percent, 2) << "%\n";

  for (const auto& fit : model_fits) {
    os << "\nMissingness model, EQ-5D at " << fit.timepoint_day << " days (ward random intercept, logit)\n";
    for (size_t i = 0; i < fit.terms.size(); ++i) {
      os << pad(fit.terms[i], 26) << lead(fixed(fit.coefficients[i], 4), 10);
      if (i < fit.z.size() && !std::isnan(fit.z[i])) os << "  (z " << fixed(fit.z[i], 2) << ")";
      os << "\n";
    }
    os << pad("cluster variance", 26) << lead(fixed(fit.cluster_variance, 4), 10) << "\n";
  }
  return os.str();
}

namespace {

std::string ci_str(double lo, double hi, int dp) {
  return "[" + fixed(lo, dp) + ", " + fixed(hi, dp) + "]";
}

void endpoint_rows(std::ostringstream& os, const char* label, const EndpointPooled& lmm, const EndpointPooled& sur,
                   int dp) {
  os << label << "\n";
  os << pad("  adj. mean control", 30) << lead(fixed(lmm.adj_mean_control, dp), 14)
     << lead(fixed(sur.adj_mean_control, dp), 14) << "\n";
  os << pad("  adj. mean intervention", 30) << lead(fixed(lmm.adj_mean_intervention, dp), 14)
     << lead(fixed(sur.adj_mean_intervention, dp), 14) << "\n";
  os << pad("  adj. mean difference", 30) << lead(fixed(lmm.difference.point, dp), 14)
     << lead(fixed(sur.difference.point, dp), 14) << "\n";
  os << pad("  SE difference", 30) << lead(fixed(lmm.difference.se, dp), 14) << lead(fixed(sur.difference.se, dp), 14)
     << "\n";
  os << pad("  95% CI difference", 30) << lead(ci_str(lmm.difference.ci_lower, lmm.difference.ci_upper, dp), 26)
     << lead(ci_str(sur.difference.ci_lower, sur.difference.ci_upper, dp), 26) << "\n";
}

}  // namespace

std::string render_analysis_table(const AnalysisResult& r) {
  std::ostringstream os;
  os << "Cost-effectiveness results (M=" << r.m << " imputations, B=" << r.b << " bootstrap replicates per set)\n";
  os << pad("", 30) << lead("MME-GLM", 14) << lead("SUR", 14) << "\n";
  endpoint_rows(os, "Total costs (GBP)", r.lmm.cost, r.sur.cost, 2);
  endpoint_rows(os, "Total QALYs", r.lmm.qaly, r.sur.qaly, 4);
  os << pad("ICER", 30) << lead(r.icer_lmm.label, 14) << lead(r.icer_sur.label, 14) << "\n";
  for (const auto& t : r.thresholds) {
    os << "At " << fixed(t.lambda, 0) << "/QALY: NHB " << fixed(t.nhb, 4) << " " << ci_str(t.nhb_ci_lower, t.nhb_ci_upper, 4)
       << ", NMB " << fixed(t.nmb, 2) << ", P(cost-effective) " << fixed(100.0 * t.prob_ce, 0) << "%\n";
  }
  return os.str();
}

std::string render_scenario_table(const std::vector<ScenarioResult>& scenarios, double primary_threshold) {
  std::ostringstream os;
  os << "Sensitivity of results to departures from random missingness in quality-of-life data\n";
  os << pad("scenario", 10) << pad("c_ctl", 7) << pad("c_int", 7) << lead("dCost", 10) << pad("  95% CI", 22)
     << lead("dQALY", 9) << pad("  95% CI", 22) << lead("NHB", 9) << pad("  95% CI", 22) << lead("P(CE)%", 7) << "\n";
  for (const auto& s : scenarios) {
    const auto& a = s.analysis;
    const ThresholdMetrics* prim = nullptr;
    for (const auto& t : a.thresholds) {
      if (t.lambda == primary_threshold) prim = &t;
    }
    os << pad(std::to_string(s.scenario.id), 10) << pad(fixed(s.scenario.c_control, 2), 7)
       << pad(fixed(s.scenario.c_intervention, 2), 7) << lead(fixed(a.lmm.cost.difference.point, 2), 10)
       << pad("  " + ci_str(a.lmm.cost.difference.ci_lower, a.lmm.cost.difference.ci_upper, 2), 22)
       << lead(fixed(a.lmm.qaly.difference.point, 4), 9)
       << pad("  " + ci_str(a.lmm.qaly.difference.ci_lower, a.lmm.qaly.difference.ci_upper, 4), 22);
    if (prim) {
      os << lead(fixed(prim->nhb, 4), 9) << pad("  " + ci_str(prim->nhb_ci_lower, prim->nhb_ci_upper, 4), 22)
         << lead(fixed(100.0 * prim->prob_ce, 0), 7);
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG figures: fixed canvas, data-driven scales, no external assets.

namespace {

struct Scale {
  double lo = 0.0, hi = 1.0;
  double px0 = 0.0, px1 = 1.0;
  double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

void expand(double& lo, double& hi) {
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double margin = 0.08 * (hi - lo);
  lo -= margin;
  hi += margin;
}

}  // namespace

std::string ce_plane_svg(const uncertainty::CeCloud& cloud, const std::string& title) {
  double elo = 0.0, ehi = 0.0, clo = 0.0, chi = 0.0;
  for (const auto& p : cloud.points) {
    elo = std::min(elo, p.delta_e);
    ehi = std::max(ehi, p.delta_e);
    clo = std::min(clo, p.delta_c);
    chi = std::max(chi, p.delta_c);
  }
  expand(elo, ehi);
  expand(clo, chi);
  const Scale sx{elo, ehi, 60.0, 560.0};
  const Scale sy{clo, chi, 380.0, 40.0};  // inverted: costs grow upwards

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='620' height='440' viewBox='0 0 620 440'>\n";
  os << "<text x='310' y='20' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  os << "<rect x='60' y='40' width='500' height='340' fill='none' stroke='black'/>\n";
  // axes through zero
  os << "<line x1='" << sx(0.0) << "' y1='40' x2='" << sx(0.0) << "' y2='380' stroke='grey' stroke-dasharray='4 3'/>\n";
  os << "<line x1='60' y1='" << sy(0.0) << "' x2='560' y2='" << sy(0.0) << "' stroke='grey' stroke-dasharray='4 3'/>\n";
  os << "<text x='310' y='420' text-anchor='middle' font-size='12'>incremental QALYs</text>\n";
  os << "<text x='18' y='210' text-anchor='middle' font-size='12' transform='rotate(-90 18 210)'>incremental cost (GBP)</text>\n";
  for (const auto& p : cloud.points) {
    os << "<circle cx='" << fixed(sx(p.delta_e), 2) << "' cy='" << fixed(sy(p.delta_c), 2)
       << "' r='1.6' fill='steelblue' fill-opacity='0.45'/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string ceac_svg(const uncertainty::Ceac& ceac, const std::string& title) {
  double lo = 0.0, hi = 1.0;
  if (!ceac.thresholds.empty()) {
    lo = ceac.thresholds.front();
    hi = ceac.thresholds.back();
  }
  if (hi == lo) hi = lo + 1.0;
  const Scale sx{lo, hi, 60.0, 560.0};
  const Scale sy{0.0, 1.0, 380.0, 40.0};

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='620' height='440' viewBox='0 0 620 440'>\n";
  os << "<text x='310' y='20' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  os << "<rect x='60' y='40' width='500' height='340' fill='none' stroke='black'/>\n";
  for (double g : {0.25, 0.5, 0.75}) {
    os << "<line x1='60' y1='" << sy(g) << "' x2='560' y2='" << sy(g) << "' stroke='lightgrey'/>\n";
  }
  os << "<text x='310' y='420' text-anchor='middle' font-size='12'>threshold (GBP per QALY)</text>\n";
  os << "<text x='18' y='210' text-anchor='middle' font-size='12' transform='rotate(-90 18 210)'>probability cost-effective</text>\n";
  os << "<polyline fill='none' stroke='firebrick' stroke-width='2' points='";
  for (size_t i = 0; i < ceac.thresholds.size(); ++i) {
    os << fixed(sx(ceac.thresholds[i]), 2) << ',' << fixed(sy(ceac.probability[i]), 2) << ' ';
  }
  os << "'/>\n</svg>\n";
  return os.str();
}

}  // namespace cea::pipeline
