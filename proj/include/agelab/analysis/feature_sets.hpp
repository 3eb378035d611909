#pragma once

#include "agelab/cohort/schema.hpp"

#include <string>
#include <vector>

namespace agelab::analysis {

enum class FeatureSetName { base, morbidity_related, entire };

const char *to_string(FeatureSetName name);
FeatureSetName feature_set_from_string(const std::string &s);

struct FeatureSet {
    FeatureSetName name = FeatureSetName::base;
    std::vector<std::string> members;
};

struct FeatureSetOptions {
    /// Members of the base set. The default is the canonical marker list per
    /// health aspect (anemia, fatness, inflammation, kidney, lung, metabolism,
    /// nutrition); configurable because the canonical count is ambiguous.
    std::vector<std::string> base_members = {"RBC", "MCV",  "WC",   "BMI",  "SMM",
                                             "BFM", "FFM",  "hsCRP", "Cr",  "FEV1",
                                             "FVC", "HbA1c", "Alb"};
    /// Disease-related features appended for the morbidity-related set.
    std::vector<std::string> morbidity_members = {"FBS", "SBP", "DBP", "LDLC", "TG", "HDLC"};
};

/// Build one of the three feature sets against a schema. The entire set is the
/// schema minus chronological-age-derived and impedance-derived features.
/// Throws ConfigError naming any member absent from the schema.
FeatureSet build_feature_set(FeatureSetName name, const cohort::Schema &schema,
                             const FeatureSetOptions &options = {});

/// Feature list for the KDM estimator: the entire set additionally screened of
/// tumor markers, eyesight measurements, and categorical variables.
std::vector<std::string> kdm_feature_screen(const cohort::Schema &schema,
                                            const FeatureSetOptions &options = {});

} // namespace agelab::analysis
