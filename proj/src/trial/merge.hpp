#pragma once

#include "trial/types.hpp"

namespace cea::trial {

// Inner join of the routine and CRF datasets on patient_id, with ward
// attributes resolved from the ward table. Analysis follows intention to
// treat: the arm is taken from the routine (randomisation) record.
MergeResult merge_datasets(const RoutineDataset& routine, const CrfDataset& crf, const WardTable& wards,
                           const MergeOptions& opts = {});

// Per-arm baseline characteristics. Ward-level variables are summarised at
// patient level (each patient carries its ward's value), so percentages come
// with an SD over patients. Continuous variables use the unequal-variance
// t-test, binary ones the two-proportion z-test.
BaselineTable baseline_summary(const MergedDataset& merged);

}  // namespace cea::trial
