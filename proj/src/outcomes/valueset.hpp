#pragma once

#include <string>

#include "trial/types.hpp"

namespace cea::outcomes {

// Tariff mapping every five-level EQ-5D profile to an index utility on the
// three-level value-set scale. The mapping ships as a data file so a licensed
// published set can be dropped in; the bundled default is a decrement-based
// synthetic set anchored at 1.0 for full health and -0.594 for the worst
// state.
class ValueSet {
public:
  static constexpr size_t kProfileCount = 3125;  // 5^5

  static ValueSet load_csv(const std::string& path);
  static ValueSet from_csv_text(const std::string& text, const std::string& origin);
  static const ValueSet& builtin_default();

  double map_profile(const trial::Eq5dProfile& profile) const;
  void write_csv(const std::string& path) const;
  std::string to_csv() const;

private:
  ValueSet() = default;
  static size_t index_of(const trial::Eq5dProfile& profile);

  std::array<double, kProfileCount> values_{};
  std::array<bool, kProfileCount> present_{};
  void validate() const;
};

// Fill missing index utilities from descriptive profiles. Utilities already
// present (supplied directly in the CRF) take precedence.
void attach_utilities(trial::MergedDataset& dataset, const ValueSet& valueset);

}  // namespace cea::outcomes
