#include "uncertainty/ceac.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "util/csv.hpp"
#include "util/error.hpp"

namespace cea::uncertainty {

Ceac compute_ceac(const CeCloud& cloud, std::span<const double> thresholds) {
  if (cloud.points.empty()) throw validation_error("compute_ceac: empty cloud");
  Ceac out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.probability.reserve(thresholds.size());
  for (double lambda : thresholds) {
    size_t pos = 0;
    for (const auto& pt : cloud.points) {
      if (lambda * pt.delta_e - pt.delta_c > 0.0) ++pos;
    }
    out.probability.push_back(static_cast<double>(pos) / static_cast<double>(cloud.points.size()));
  }
  return out;
}

std::vector<double> threshold_grid(double min, double max, double step, std::span<const double> always_include) {
  if (!(step > 0.0) || max < min) throw validation_error("threshold_grid: invalid grid");
  std::vector<double> grid;
  for (double v = min; v <= max + 1e-9; v += step) grid.push_back(v);
  for (double v : always_include) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

QuadrantShares quadrant_shares(const CeCloud& cloud) {
  QuadrantShares q;
  if (cloud.points.empty()) return q;
  for (const auto& pt : cloud.points) {
    if (pt.delta_e > 0.0) {
      (pt.delta_c < 0.0 ? q.se : q.ne) += 1.0;
    } else {
      (pt.delta_c < 0.0 ? q.sw : q.nw) += 1.0;
    }
  }
  const auto n = static_cast<double>(cloud.points.size());
  q.ne /= n;
  q.nw /= n;
  q.se /= n;
  q.sw /= n;
  return q;
}

std::string ce_plane_csv(const std::vector<std::pair<int, const CeCloud*>>& scenarios) {
  CsvWriter w({"scenario", "m", "b", "delta_e", "delta_c"});
  for (const auto& [id, cloud] : scenarios) {
    for (const auto& pt : cloud->points) {
      w.add_row({std::to_string(id), std::to_string(pt.imputation), std::to_string(pt.replicate),
                 CsvWriter::format(pt.delta_e), CsvWriter::format(pt.delta_c)});
    }
  }
  return w.to_string();
}

std::string ceac_csv(const Ceac& ceac) {
  CsvWriter w({"lambda", "probability"});
  for (size_t i = 0; i < ceac.thresholds.size(); ++i) {
    w.add_row({CsvWriter::format(ceac.thresholds[i]), CsvWriter::format(ceac.probability[i])});
  }
  return w.to_string();
}

void ce_plane_export(const CeCloud& cloud, int scenario_id, const std::string& csv_path,
                     const std::string& sidecar_json_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + csv_path);
    out << ce_plane_csv({{scenario_id, &cloud}});
  }
  const QuadrantShares q = quadrant_shares(cloud);
  nlohmann::json j;
  j["scenario"] = scenario_id;
  j["points"] = cloud.points.size();
  j["quadrants"] = {{"ne", q.ne}, {"nw", q.nw}, {"se", q.se}, {"sw", q.sw}};
  std::ofstream out(sidecar_json_path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + sidecar_json_path);
  out << j.dump(2) << '\n';
}

}  // namespace cea::uncertainty
