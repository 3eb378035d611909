#pragma once

#include "agelab/cohort/types.hpp"

#include <filesystem>

namespace agelab::cohort {

/// Write cohort.csv (one row per subject), schema.csv, and events.csv
/// (death and DM-onset rows) into the directory.
void save_cohort(const std::filesystem::path &dir, const CohortTable &cohort);

/// Load a cohort written by save_cohort; labels are recomputed.
CohortTable load_cohort(const std::filesystem::path &dir);

} // namespace agelab::cohort
