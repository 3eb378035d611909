#pragma once

#include "agelab/cohort/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace agelab::cohort {

/// How one biomarker responds to the (latent) biological age:
///   value = value_at_ref + slope * (BA - ref_age) + noise,  clamped at floor.
struct FeatureGenSpec {
    double value_at_ref_male = 0.0;
    double value_at_ref_female = 0.0;
    double slope = 0.0; // units per year of biological age
    double noise_sd = 0.0;
    double floor = -1e300;
};

struct HazardConfig {
    /// Expected cumulative hazard over the follow-up horizon at BA = ref_age.
    double cumulative_at_ref = 0.023;
    /// Log-hazard slope per year of biological age.
    double beta_per_year = 0.15;
    double ref_age = 60.0;
    int horizon_days = 3650;
    /// Weibull shape of the survival time (1 = exponential); the hazard stays
    /// monotonically increasing in biological age for any shape.
    double shape = 2.0;
};

struct MedicationConfig {
    double p_illness = 0.35;
    double p_pre = 0.05;
    double p_base = 0.01;
};

/// Diagnostic-history prevalence: P(flag) = sigmoid(intercept + slope * BA).
struct HistoryConfig {
    double intercept = -5.5;
    double slope = 0.045;
};

struct GeneratorConfig {
    std::size_t subject_count = 10000;
    double male_fraction = 0.5;
    double age_min = 20.0;
    double age_max = 85.0;
    /// Standard deviation of the per-subject aging rate (mean zero).
    double aging_rate_sd = 0.18;
    /// BA = CA + aging_coeff * rate * (CA - age_min).
    double aging_coeff = 1.0;
    HazardConfig hazard;
    MedicationConfig medication;
    HistoryConfig cancer_history;
    HistoryConfig cvd_history;
    HistoryConfig cva_history;
    /// Horizon for the simulated future DM onset (days).
    int dm_onset_horizon_days = 3650;
    double reference_age = 45.0;
    /// Per-feature generation parameters; keys must cover the schema.
    std::map<std::string, FeatureGenSpec> features;

    void validate(const Schema &schema) const;
};

/// Built-in feature registry with the health-checkup biomarkers used by the
/// default configuration, ordered canonically.
Schema default_schema();

GeneratorConfig default_generator_config();

/// Deterministic synthetic cohort: equal (config, seed) gives byte-identical
/// output. Labels are computed as part of generation.
CohortTable generate_cohort(const Schema &schema, const GeneratorConfig &config,
                            std::uint64_t seed);

GeneratorConfig load_generator_config(const std::filesystem::path &path, Schema &schema_out);
void save_generator_config(const std::filesystem::path &path, const Schema &schema,
                           const GeneratorConfig &config);

/// JSON forms carrying both the schema and the generation parameters.
nlohmann::json generator_to_json(const Schema &schema, const GeneratorConfig &config);
GeneratorConfig generator_from_json(const nlohmann::json &j, Schema &schema_out);

} // namespace agelab::cohort
