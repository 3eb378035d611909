#pragma once

#include "agelab/cohort/schema.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agelab::cohort {

enum class Sex { male, female };

const char *to_string(Sex s);
Sex sex_from_string(const std::string &s);

/// Tri-state morbidity for DM/HBP/DLP.
enum class TriState { normal, pre, illness };

/// Binary morbidity for MS, cancer, CVD, CVA.
enum class BinaryState { healthy, with_disease };

/// Overall health bucket used by the gap-by-morbidity tables.
enum class OverallState { healthy, average, unhealthy };

const char *to_string(TriState s);
const char *to_string(BinaryState s);
const char *to_string(OverallState s);

struct DeathRecord {
    int days_to_death = 0; // > 0
    std::string cause;
};

struct SubjectRecord {
    std::string id;
    Sex sex = Sex::male;
    double chronological_age = 0.0;
    /// Values aligned with the schema feature order; missing entries empty.
    std::vector<std::optional<double>> biomarkers;
    bool dm_medication = false;
    bool hbp_medication = false;
    bool dlp_medication = false;
    bool cancer_history = false;
    bool cvd_history = false;
    bool cva_history = false;
    std::optional<DeathRecord> death;
    std::optional<int> dm_onset_days;
    /// Synthetic ground truth; never exposed to estimators.
    double true_aging_rate = 0.0;

    std::optional<double> biomarker(const Schema &schema, const std::string &name) const;
};

struct MorbidityLabel {
    TriState dm = TriState::pre;
    TriState hbp = TriState::pre;
    TriState dlp = TriState::pre;
    BinaryState ms = BinaryState::healthy;
    BinaryState cancer = BinaryState::healthy;
    BinaryState cvd = BinaryState::healthy;
    BinaryState cva = BinaryState::healthy;
    OverallState overall = OverallState::average;
    /// Diseases whose label could not be determined because every relevant
    /// biomarker was missing; labeled pre (tri-state) and flagged here.
    std::vector<Disease> indeterminate;

    bool is_indeterminate(Disease d) const;
    TriState tri(Disease d) const;
    BinaryState binary(Disease d) const;
    bool any_illness() const;
};

/// Compute the overall bucket from the per-disease states.
OverallState overall_state(const MorbidityLabel &label);

struct CohortTable {
    Schema schema;
    std::vector<SubjectRecord> records;
    std::vector<MorbidityLabel> labels;

    std::size_t size() const { return records.size(); }
};

enum class PopulationKind { super_normal, normal, average, whole };

const char *to_string(PopulationKind k);
PopulationKind population_from_string(const std::string &s);

struct PopulationGroup {
    PopulationKind kind = PopulationKind::whole;
    /// Indices into CohortTable::records, ascending.
    std::vector<std::size_t> member_ids;
};

struct SplitSpec {
    double train_ratio = 0.70;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    std::uint64_t seed = 0;
    int repeat_index = 0;
};

struct CohortSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

} // namespace agelab::cohort
