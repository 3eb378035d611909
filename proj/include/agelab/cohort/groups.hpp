#pragma once

#include "agelab/cohort/types.hpp"

#include <map>

namespace agelab::cohort {

/// The eight disease-related features that define the average group.
const std::vector<std::string> &disease_related_features();

/// Build the four nested study populations. The average group's mean/std
/// reference is the whole cohort, separately per sex.
std::map<PopulationKind, PopulationGroup> assign_population_groups(const CohortTable &cohort);

/// Random 0.70/0.15/0.15 split of a population group. Deterministic per
/// (seed, repeat_index); refuses groups smaller than 10 subjects.
CohortSplit split_cohort(const PopulationGroup &group, const SplitSpec &spec);

} // namespace agelab::cohort
