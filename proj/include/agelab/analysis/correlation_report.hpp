#pragma once

#include "agelab/cohort/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace agelab::analysis {

/// One feature's correlation-vs-age row for one (sex, group) slice.
struct CorrelationRow {
    std::string feature;
    std::string sex;   // "all", "male", "female"
    std::string group; // population group name
    std::optional<double> pcc;
    std::optional<double> srocc;
    std::optional<double> mi;
    double missing_rate = 0.0;
    bool excluded_missing = false; // missing rate above the threshold
    bool top_pcc = false;
    bool top_srocc = false;
    bool top_mi = false;
};

struct CorrelationReport {
    std::vector<CorrelationRow> rows;

    std::vector<std::string> flagged_features(const std::string &sex,
                                              const std::string &group) const;
    void save(const std::filesystem::path &path) const;
};

struct CorrelationOptions {
    double top_fraction = 0.10;
    double missing_threshold = 0.50;
    int mi_bins = 16;
};

/// Correlation analysis of every schema feature against chronological age for
/// one population group, reported for the combined population and per sex.
/// Features are flagged when they fall in the top decile of |PCC|, |SROCC|,
/// or MI; boundary ties are all included.
CorrelationReport select_age_correlated_features(const cohort::CohortTable &cohort,
                                                 const cohort::PopulationGroup &group,
                                                 const CorrelationOptions &options = {});

} // namespace agelab::analysis
