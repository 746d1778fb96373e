#include "outcomes/valueset.hpp"

#include <cmath>
#include <fstream>

#include "util/csv.hpp"
#include "util/error.hpp"

namespace cea::outcomes {

using trial::Eq5dProfile;

size_t ValueSet::index_of(const Eq5dProfile& p) {
  size_t idx = 0;
  for (int level : p.levels) {
    if (level < 1 || level > 5) {
      throw validation_error("EQ-5D profile level out of range: " + std::to_string(level));
    }
    idx = idx * 5 + static_cast<size_t>(level - 1);
  }
  return idx;
}

void ValueSet::validate() const {
  size_t missing = 0;
  double max_v = -1e9;
  for (size_t i = 0; i < kProfileCount; ++i) {
    if (!present_[i]) {
      ++missing;
      continue;
    }
    if (!std::isfinite(values_[i]) || values_[i] > 1.0) {
      throw validation_error("value set: utility out of range at profile index " + std::to_string(i));
    }
    max_v = std::max(max_v, values_[i]);
  }
  if (missing > 0) {
    throw validation_error("value set: " + std::to_string(missing) + " of 3125 profiles missing; must be total");
  }
  if (values_[0] != 1.0) {
    throw validation_error("value set: full-health profile (1,1,1,1,1) must map to 1.0");
  }
  if (max_v != 1.0) {
    throw validation_error("value set: maximum utility must be 1.0 at full health");
  }
}

ValueSet ValueSet::load_csv(const std::string& path) {
  return from_csv_text([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open value set file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }(), path);
}

ValueSet ValueSet::from_csv_text(const std::string& text, const std::string& origin) {
  CsvTable t = CsvTable::read_string(text, origin);
  std::array<size_t, 5> dim_cols;
  for (size_t d = 0; d < 5; ++d) dim_cols[d] = t.column(trial::kEq5dDims[d]);
  const size_t c_util = t.column("utility");

  ValueSet vs;
  for (size_t r = 0; r < t.rows(); ++r) {
    Eq5dProfile p;
    for (size_t d = 0; d < 5; ++d) {
      auto v = t.get_long(r, dim_cols[d]);
      if (!v) throw validation_error(origin + ": blank profile level at line " + std::to_string(t.line_number(r)));
      p.levels[d] = static_cast<int>(*v);
    }
    auto u = t.get_double(r, c_util);
    if (!u) throw validation_error(origin + ": blank utility at line " + std::to_string(t.line_number(r)));
    const size_t idx = index_of(p);
    if (vs.present_[idx]) {
      throw validation_error(origin + ": duplicate profile at line " + std::to_string(t.line_number(r)));
    }
    vs.present_[idx] = true;
    vs.values_[idx] = *u;
  }
  vs.validate();
  return vs;
}

const ValueSet& ValueSet::builtin_default() {
  static const ValueSet vs = [] {
    // Additive decrement tariff. Per-dimension level-2/level-3 decrements on
    // the three-level scale, with five-level positions interpolated halfway
    // between them; a constant decrement for any departure from full health
    // and an extra decrement when any dimension reaches the severe range.
    // Anchors: (1,1,1,1,1) -> 1.0 and (5,5,5,5,5) -> -0.594.
    constexpr double kAnyDecrement = 0.081;
    constexpr double kSevereDecrement = 0.269;
    constexpr double kLevel2[5] = {0.069, 0.104, 0.036, 0.123, 0.071};
    constexpr double kLevel3[5] = {0.314, 0.214, 0.094, 0.386, 0.236};

    ValueSet out;
    Eq5dProfile p;
    for (int mo = 1; mo <= 5; ++mo)
      for (int sc = 1; sc <= 5; ++sc)
        for (int ua = 1; ua <= 5; ++ua)
          for (int pd = 1; pd <= 5; ++pd)
            for (int ad = 1; ad <= 5; ++ad) {
              p.levels = {mo, sc, ua, pd, ad};
              double u = 1.0;
              int max_level = 1;
              for (size_t d = 0; d < 5; ++d) {
                const int lv = p.levels[d];
                max_level = std::max(max_level, lv);
                switch (lv) {
                  case 1: break;
                  case 2: u -= 0.5 * kLevel2[d]; break;
                  case 3: u -= kLevel2[d]; break;
                  case 4: u -= 0.5 * (kLevel2[d] + kLevel3[d]); break;
                  case 5: u -= kLevel3[d]; break;
                }
              }
              if (max_level > 1) u -= kAnyDecrement;
              if (max_level == 5) u -= kSevereDecrement;
              else if (max_level == 4) u -= 0.5 * kSevereDecrement;
              // Keep the file at tariff-table precision.
              u = std::round(u * 10000.0) / 10000.0;
              const size_t idx = index_of(p);
              out.values_[idx] = u;
              out.present_[idx] = true;
            }
    out.validate();
    return out;
  }();
  return vs;
}

double ValueSet::map_profile(const Eq5dProfile& profile) const {
  const size_t idx = index_of(profile);
  if (!present_[idx]) throw validation_error("value set does not cover the requested profile");
  return values_[idx];
}

std::string ValueSet::to_csv() const {
  CsvWriter w({"mo", "sc", "ua", "pd", "ad", "utility"});
  Eq5dProfile p;
  for (int mo = 1; mo <= 5; ++mo)
    for (int sc = 1; sc <= 5; ++sc)
      for (int ua = 1; ua <= 5; ++ua)
        for (int pd = 1; pd <= 5; ++pd)
          for (int ad = 1; ad <= 5; ++ad) {
            p.levels = {mo, sc, ua, pd, ad};
            w.add_row({std::to_string(mo), std::to_string(sc), std::to_string(ua), std::to_string(pd),
                       std::to_string(ad), CsvWriter::format(values_[index_of(p)])});
          }
  return w.to_string();
}

void ValueSet::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write value set file: " + path);
  out << to_csv();
}

void attach_utilities(trial::MergedDataset& dataset, const ValueSet& valueset) {
  for (auto& p : dataset.patients) {
    for (size_t t = 0; t < trial::kNumTimepoints; ++t) {
      if (!p.utilities[t] && p.profiles[t]) {
        p.utilities[t] = valueset.map_profile(*p.profiles[t]);
      }
    }
  }
}

}  // namespace cea::outcomes
