#pragma once

#include "agelab/cohort/types.hpp"

namespace agelab::cohort {

/// Threshold-based morbidity state for one subject. Pure function of the
/// record: missing biomarkers never satisfy a condition, and a disease whose
/// relevant biomarkers are all missing (with no medication flag) is labeled
/// pre and flagged indeterminate.
MorbidityLabel label_morbidity(const SubjectRecord &record, const Schema &schema);

/// Label every record of the cohort in place.
void label_cohort(CohortTable &cohort);

} // namespace agelab::cohort
