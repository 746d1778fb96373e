#pragma once

#include <string>

#include "trial/types.hpp"
#include "util/csv.hpp"

namespace cea::trial {

// Parsers for the three input files. In strict mode any malformed row aborts
// with a validation error carrying the file and line; in lenient mode the row
// is skipped and recorded in the dataset's issue list. Blank cells are always
// missing values, never zeros.

RoutineDataset parse_routine_csv(const std::string& path, bool strict = true);
RoutineDataset parse_routine(const CsvTable& table, bool strict = true);

CrfDataset parse_crf_csv(const std::string& path, bool strict = true);
CrfDataset parse_crf(const CsvTable& table, bool strict = true);

WardTable parse_wards_csv(const std::string& path, bool strict = true);
WardTable parse_wards(const CsvTable& table, bool strict = true);

}  // namespace cea::trial
