#include "agelab/cohort/generator.hpp"

#include "agelab/cohort/labeling.hpp"
#include "agelab/common/error.hpp"
#include "agelab/common/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace agelab::cohort {

using nlohmann::json;

void GeneratorConfig::validate(const Schema &schema) const {
    if (subject_count == 0) {
        throw ConfigError("generator: subject_count must be positive");
    }
    if (male_fraction < 0.0 || male_fraction > 1.0) {
        throw ConfigError("generator: male_fraction outside [0,1]");
    }
    if (age_min >= age_max) {
        throw ConfigError("generator: age_min must be below age_max");
    }
    if (aging_rate_sd < 0.0) {
        throw ConfigError("generator: aging_rate_sd must be non-negative");
    }
    for (const auto &f : schema.features()) {
        auto it = features.find(f.name);
        if (it == features.end()) {
            throw ConfigError("generator: no generation spec for feature " + f.name);
        }
        if (it->second.noise_sd < 0.0) {
            throw ConfigError("generator: negative noise scale for feature " + f.name);
        }
        if (f.missing_rate < 0.0 || f.missing_rate > 1.0) {
            throw ConfigError("generator: missing rate outside [0,1] for feature " + f.name);
        }
    }
}

namespace {

struct FeatureDef {
    FeatureSpec spec;
    FeatureGenSpec gen;
};

FeatureDef make(std::string name, std::string unit, double lo, double hi, double miss,
                std::vector<Disease> tags, double ref_m, double ref_f, double slope,
                double noise, double floor = -1e300) {
    FeatureDef d;
    d.spec.name = std::move(name);
    d.spec.unit = std::move(unit);
    d.spec.normal_low = lo;
    d.spec.normal_high = hi;
    d.spec.missing_rate = miss;
    d.spec.disease_tags = std::move(tags);
    d.gen.value_at_ref_male = ref_m;
    d.gen.value_at_ref_female = ref_f;
    d.gen.slope = slope;
    d.gen.noise_sd = noise;
    d.gen.floor = floor;
    return d;
}

std::vector<FeatureDef> default_features() {
    std::vector<FeatureDef> defs;
    // base biomarkers
    defs.push_back(make("RBC", "10^6/uL", 4.0, 5.6, 0.02, {}, 4.9, 4.4, -0.006, 0.28));
    defs.push_back(make("MCV", "fL", 80, 100, 0.02, {}, 90.0, 89.0, 0.06, 3.2));
    defs.push_back(make("WC", "cm", 65, 90, 0.03, {Disease::ms}, 84.0, 77.0, 0.18, 6.5));
    defs.push_back(make("BMI", "kg/m2", 18.5, 25, 0.01, {}, 24.2, 22.3, 0.02, 2.6));
    defs.push_back(make("SMM", "kg", 20, 40, 0.05, {}, 31.0, 21.5, -0.12, 3.0));
    defs.push_back(make("BFM", "kg", 8, 25, 0.05, {}, 18.0, 19.0, 0.10, 4.2));
    defs.push_back(make("FFM", "kg", 35, 65, 0.05, {}, 55.0, 40.0, -0.15, 4.0));
    defs.push_back(make("hsCRP", "mg/L", 0.0, 3.0, 0.12, {}, 1.0, 0.9, 0.02, 0.85, 0.01));
    defs.push_back(make("Cr", "mg/dL", 0.5, 1.2, 0.02, {}, 0.95, 0.75, 0.002, 0.10, 0.2));
    defs.push_back(make("FEV1", "L", 2.0, 5.0, 0.08, {}, 3.6, 2.6, -0.030, 0.34, 0.4));
    defs.push_back(make("FVC", "L", 2.5, 6.0, 0.08, {}, 4.4, 3.2, -0.032, 0.40, 0.5));
    defs.push_back(make("HbA1c", "%", 4.0, 5.7, 0.04, {Disease::dm}, 5.50, 5.45, 0.012, 0.34, 3.5));
    defs.push_back(make("Alb", "g/dL", 3.5, 5.2, 0.03, {}, 4.4, 4.3, -0.006, 0.25, 2.0));
    // disease-related biomarkers
    defs.push_back(
        make("FBS", "mg/dL", 70, 100, 0.02, {Disease::dm, Disease::ms}, 92.0, 90.0, 0.35, 9.5, 50));
    defs.push_back(make("SBP", "mmHg", 90, 120, 0.01, {Disease::hbp, Disease::ms}, 116.0, 112.0,
                        0.45, 11.0, 70));
    defs.push_back(
        make("DBP", "mmHg", 60, 80, 0.01, {Disease::hbp, Disease::ms}, 73.0, 71.0, 0.18, 8.0, 40));
    defs.push_back(make("LDLC", "mg/dL", 60, 130, 0.05, {Disease::dlp}, 116.0, 112.0, 0.50, 26.0, 30));
    defs.push_back(make("TG", "mg/dL", 30, 150, 0.05, {Disease::dlp, Disease::ms}, 128.0, 100.0,
                        0.60, 46.0, 25));
    defs.push_back(make("HDLC", "mg/dL", 40, 90, 0.05, {Disease::dlp, Disease::ms}, 50.0, 58.0,
                        -0.08, 11.0, 15));
    // additional checkup attributes for the entire feature set
    defs.push_back(make("Height", "cm", 150, 190, 0.01, {}, 172.0, 159.0, -0.06, 6.0));
    defs.push_back(make("Hb", "g/dL", 12, 17, 0.02, {}, 15.0, 13.1, -0.010, 1.0));
    defs.push_back(make("BUN", "mg/dL", 7, 20, 0.04, {}, 14.0, 12.5, 0.060, 3.0, 2.0));
    defs.push_back(make("Calcium", "mg/dL", 8.5, 10.5, 0.05, {}, 9.5, 9.4, -0.002, 0.32));
    defs.push_back(make("ALT", "U/L", 5, 40, 0.03, {}, 24.0, 18.0, 0.02, 9.0, 3.0));
    defs.push_back(make("Uric_acid", "mg/dL", 3.0, 7.0, 0.04, {}, 5.8, 4.4, 0.004, 1.1, 1.0));
    // excluded from the entire set: computed from chronological age
    auto egfr = make("eGFR_CKD_EPI", "mL/min/1.73m2", 60, 120, 0.03, {}, 98.0, 100.0, -0.80, 8.0, 10);
    egfr.spec.derived_from_ca = true;
    defs.push_back(egfr);
    auto fvcp = make("FVC_percentile", "%", 80, 120, 0.10, {}, 100.0, 100.0, 0.0, 10.0);
    fvcp.spec.derived_from_ca = true;
    defs.push_back(fvcp);
    // excluded from the entire set: impedance-derived
    auto vfa = make("Visceral_fat_area", "cm2", 30, 100, 0.15, {}, 85.0, 70.0, 0.90, 26.0, 5);
    vfa.spec.impedance = true;
    defs.push_back(vfa);
    auto icw = make("Intracellular_fluid", "L", 20, 30, 0.15, {}, 25.0, 18.5, -0.05, 2.0, 8);
    icw.spec.impedance = true;
    defs.push_back(icw);
    // screened out for KDM
    auto cea = make("CEA", "ng/mL", 0, 5, 0.30, {}, 1.8, 1.6, 0.010, 1.1, 0.1);
    cea.spec.tumor_marker = true;
    defs.push_back(cea);
    auto eye = make("Eyesight_L", "", 0.1, 1.5, 0.10, {}, 1.0, 1.0, -0.008, 0.25, 0.05);
    eye.spec.eyesight = true;
    defs.push_back(eye);
    auto smoke = make("Smoking_status", "category", 0, 2, 0.05, {}, 0.9, 0.4, 0.0, 0.8, 0.0);
    smoke.spec.categorical = true;
    defs.push_back(smoke);
    // sparse measurement, above the 50% missing-rate screen
    defs.push_back(make("HPylori_Ab", "titer", 0, 1, 0.62, {}, 0.8, 0.8, 0.004, 0.5, 0.0));
    return defs;
}

} // namespace

Schema default_schema() {
    std::vector<FeatureSpec> specs;
    for (auto &d : default_features()) {
        specs.push_back(d.spec);
    }
    return Schema(std::move(specs));
}

GeneratorConfig default_generator_config() {
    GeneratorConfig config;
    for (auto &d : default_features()) {
        config.features[d.spec.name] = d.gen;
    }
    return config;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Probability of holding a medication prescription given the generated
/// marker levels for the disease.
double medication_probability(const MedicationConfig &med, bool illness_level, bool pre_level) {
    if (illness_level) {
        return med.p_illness;
    }
    if (pre_level) {
        return med.p_pre;
    }
    return med.p_base;
}

} // namespace

CohortTable generate_cohort(const Schema &schema, const GeneratorConfig &config,
                            std::uint64_t seed) {
    config.validate(schema);
    CohortTable cohort;
    cohort.schema = schema;
    cohort.records.reserve(config.subject_count);

    const std::size_t n_features = schema.size();
    for (std::size_t i = 0; i < config.subject_count; ++i) {
        util::Rng rng(util::derive_seed(seed, i));
        SubjectRecord r;
        r.id = "s" + std::to_string(i);
        r.sex = rng.bernoulli(config.male_fraction) ? Sex::male : Sex::female;
        r.chronological_age = rng.uniform(config.age_min, config.age_max);
        r.true_aging_rate = rng.normal(0.0, config.aging_rate_sd);
        const double ba =
            r.chronological_age +
            config.aging_coeff * r.true_aging_rate * (r.chronological_age - config.age_min);

        r.biomarkers.resize(n_features);
        std::vector<double> values(n_features);
        for (std::size_t j = 0; j < n_features; ++j) {
            const FeatureGenSpec &gen = config.features.at(schema.at(j).name);
            const double ref =
                r.sex == Sex::male ? gen.value_at_ref_male : gen.value_at_ref_female;
            double v = ref + gen.slope * (ba - config.reference_age) + rng.normal(0.0, gen.noise_sd);
            v = std::max(v, gen.floor);
            values[j] = v;
            r.biomarkers[j] = v;
        }

        auto value_of = [&](const char *name) -> double {
            return values[schema.index_of(name)];
        };

        // Medication flags from the generated marker levels.
        {
            const double fbs = value_of("FBS");
            const double a1c = value_of("HbA1c");
            r.dm_medication = rng.bernoulli(medication_probability(
                config.medication, fbs >= 126.0 || a1c >= 6.5, fbs >= 100.0 || a1c >= 5.7));
            const double sbp = value_of("SBP");
            const double dbp = value_of("DBP");
            r.hbp_medication = rng.bernoulli(medication_probability(
                config.medication, sbp >= 140.0 || dbp >= 90.0, sbp >= 120.0 || dbp >= 80.0));
            const double ldlc = value_of("LDLC");
            const double tg = value_of("TG");
            const double hdlc = value_of("HDLC");
            r.dlp_medication = rng.bernoulli(medication_probability(
                config.medication, ldlc >= 160.0 || tg >= 200.0 || hdlc < 40.0,
                ldlc >= 100.0 || tg >= 150.0 || hdlc < 60.0));
        }

        r.cancer_history = rng.bernoulli(
            sigmoid(config.cancer_history.intercept + config.cancer_history.slope * ba));
        r.cvd_history =
            rng.bernoulli(sigmoid(config.cvd_history.intercept + config.cvd_history.slope * ba));
        r.cva_history =
            rng.bernoulli(sigmoid(config.cva_history.intercept + config.cva_history.slope * ba));

        // Weibull survival time with scale increasing in biological age,
        // censored at the follow-up horizon.
        {
            const HazardConfig &hz = config.hazard;
            const double cumulative = hz.cumulative_at_ref *
                                      std::exp(hz.beta_per_year * (ba - hz.ref_age));
            const double u = rng.uniform();
            // S(t) = exp(-cumulative * (t/H)^shape)
            const double t = hz.horizon_days *
                             std::pow(-std::log(1.0 - u) / cumulative, 1.0 / hz.shape);
            if (t <= hz.horizon_days) {
                DeathRecord death;
                death.days_to_death = std::max(1, static_cast<int>(std::ceil(t)));
                death.cause = "all";
                r.death = death;
            }
        }

        // Future DM onset: time until the subject's FBS or HbA1c drifts across
        // the illness threshold at the subject's own aging speed.
        {
            const double fbs = value_of("FBS");
            const double a1c = value_of("HbA1c");
            const bool already_ill = fbs >= 126.0 || a1c >= 6.5 || r.dm_medication;
            if (!already_ill) {
                const double speed = 1.0 + config.aging_coeff * r.true_aging_rate;
                double days = 1e300;
                if (speed > 0.0) {
                    const double k_fbs = config.features.at("FBS").slope;
                    const double k_a1c = config.features.at("HbA1c").slope;
                    if (k_fbs > 0.0) {
                        days = std::min(days, 365.25 * (126.0 - fbs) / (k_fbs * speed));
                    }
                    if (k_a1c > 0.0) {
                        days = std::min(days, 365.25 * (6.5 - a1c) / (k_a1c * speed));
                    }
                }
                if (days <= config.dm_onset_horizon_days) {
                    r.dm_onset_days = std::max(1, static_cast<int>(std::ceil(days)));
                }
            }
        }

        // Missingness is applied last; the events above reflect the underlying
        // physiology, not the measured subset.
        for (std::size_t j = 0; j < n_features; ++j) {
            if (rng.bernoulli(schema.at(j).missing_rate)) {
                r.biomarkers[j] = std::nullopt;
            }
        }

        cohort.records.push_back(std::move(r));
    }

    label_cohort(cohort);
    return cohort;
}

namespace {

json hazard_to_json(const HazardConfig &h) {
    return json{{"cumulative_at_ref", h.cumulative_at_ref},
                {"beta_per_year", h.beta_per_year},
                {"ref_age", h.ref_age},
                {"horizon_days", h.horizon_days},
                {"shape", h.shape}};
}

HazardConfig hazard_from_json(const json &j) {
    HazardConfig h;
    h.cumulative_at_ref = j.value("cumulative_at_ref", h.cumulative_at_ref);
    h.beta_per_year = j.value("beta_per_year", h.beta_per_year);
    h.ref_age = j.value("ref_age", h.ref_age);
    h.horizon_days = j.value("horizon_days", h.horizon_days);
    h.shape = j.value("shape", h.shape);
    return h;
}

json history_to_json(const HistoryConfig &h) {
    return json{{"intercept", h.intercept}, {"slope", h.slope}};
}

HistoryConfig history_from_json(const json &j, HistoryConfig fallback) {
    fallback.intercept = j.value("intercept", fallback.intercept);
    fallback.slope = j.value("slope", fallback.slope);
    return fallback;
}

} // namespace

json generator_to_json(const Schema &schema, const GeneratorConfig &config) {
    json j;
    j["subject_count"] = config.subject_count;
    j["male_fraction"] = config.male_fraction;
    j["age_min"] = config.age_min;
    j["age_max"] = config.age_max;
    j["aging_rate_sd"] = config.aging_rate_sd;
    j["aging_coeff"] = config.aging_coeff;
    j["reference_age"] = config.reference_age;
    j["dm_onset_horizon_days"] = config.dm_onset_horizon_days;
    j["hazard"] = hazard_to_json(config.hazard);
    j["medication"] = json{{"p_illness", config.medication.p_illness},
                           {"p_pre", config.medication.p_pre},
                           {"p_base", config.medication.p_base}};
    j["cancer_history"] = history_to_json(config.cancer_history);
    j["cvd_history"] = history_to_json(config.cvd_history);
    j["cva_history"] = history_to_json(config.cva_history);
    json feats = json::object();
    for (const auto &f : schema.features()) {
        const FeatureGenSpec &g = config.features.at(f.name);
        json tags = json::array();
        for (Disease d : f.disease_tags) {
            tags.push_back(to_string(d));
        }
        feats[f.name] = json{{"unit", f.unit},
                             {"normal_low", f.normal_low},
                             {"normal_high", f.normal_high},
                             {"missing_rate", f.missing_rate},
                             {"disease_tags", tags},
                             {"derived_from_ca", f.derived_from_ca},
                             {"impedance", f.impedance},
                             {"tumor_marker", f.tumor_marker},
                             {"eyesight", f.eyesight},
                             {"categorical", f.categorical},
                             {"order", &f - schema.features().data()},
                             {"value_at_ref_male", g.value_at_ref_male},
                             {"value_at_ref_female", g.value_at_ref_female},
                             {"slope", g.slope},
                             {"noise_sd", g.noise_sd},
                             {"floor", g.floor}};
    }
    j["features"] = std::move(feats);
    return j;
}

void save_generator_config(const std::filesystem::path &path, const Schema &schema,
                           const GeneratorConfig &config) {
    std::ofstream out(path);
    if (!out) {
        throw AgelabError("cannot write generator config: " + path.string());
    }
    out << generator_to_json(schema, config).dump(2) << '\n';
}

GeneratorConfig generator_from_json(const json &j, Schema &schema_out) {
    GeneratorConfig config;
    config.subject_count = j.value("subject_count", config.subject_count);
    config.male_fraction = j.value("male_fraction", config.male_fraction);
    config.age_min = j.value("age_min", config.age_min);
    config.age_max = j.value("age_max", config.age_max);
    config.aging_rate_sd = j.value("aging_rate_sd", config.aging_rate_sd);
    config.aging_coeff = j.value("aging_coeff", config.aging_coeff);
    config.reference_age = j.value("reference_age", config.reference_age);
    config.dm_onset_horizon_days = j.value("dm_onset_horizon_days", config.dm_onset_horizon_days);
    if (j.contains("hazard")) {
        config.hazard = hazard_from_json(j["hazard"]);
    }
    if (j.contains("medication")) {
        const json &m = j["medication"];
        config.medication.p_illness = m.value("p_illness", config.medication.p_illness);
        config.medication.p_pre = m.value("p_pre", config.medication.p_pre);
        config.medication.p_base = m.value("p_base", config.medication.p_base);
    }
    config.cancer_history = history_from_json(j.value("cancer_history", json::object()),
                                              config.cancer_history);
    config.cvd_history = history_from_json(j.value("cvd_history", json::object()),
                                           config.cvd_history);
    config.cva_history = history_from_json(j.value("cva_history", json::object()),
                                           config.cva_history);

    std::vector<std::pair<int, FeatureSpec>> ordered;
    for (auto it = j["features"].begin(); it != j["features"].end(); ++it) {
        const json &f = it.value();
        FeatureSpec spec;
        spec.name = it.key();
        spec.unit = f.value("unit", "");
        spec.normal_low = f.value("normal_low", 0.0);
        spec.normal_high = f.value("normal_high", 0.0);
        spec.missing_rate = f.value("missing_rate", 0.0);
        for (const auto &tag : f.value("disease_tags", json::array())) {
            for (Disease d : all_diseases()) {
                if (tag.get<std::string>() == to_string(d)) {
                    spec.disease_tags.push_back(d);
                }
            }
        }
        spec.derived_from_ca = f.value("derived_from_ca", false);
        spec.impedance = f.value("impedance", false);
        spec.tumor_marker = f.value("tumor_marker", false);
        spec.eyesight = f.value("eyesight", false);
        spec.categorical = f.value("categorical", false);
        FeatureGenSpec gen;
        gen.value_at_ref_male = f.value("value_at_ref_male", 0.0);
        gen.value_at_ref_female = f.value("value_at_ref_female", 0.0);
        gen.slope = f.value("slope", 0.0);
        gen.noise_sd = f.value("noise_sd", 0.0);
        gen.floor = f.value("floor", -1e300);
        config.features[spec.name] = gen;
        ordered.emplace_back(f.value("order", static_cast<int>(ordered.size())), std::move(spec));
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
    std::vector<FeatureSpec> specs;
    specs.reserve(ordered.size());
    for (auto &p : ordered) {
        specs.push_back(std::move(p.second));
    }
    schema_out = Schema(std::move(specs));
    return config;
}

GeneratorConfig load_generator_config(const std::filesystem::path &path, Schema &schema_out) {
    std::ifstream in(path);
    if (!in) {
        throw AgelabError("cannot open generator config: " + path.string());
    }
    json j = json::parse(in);
    return generator_from_json(j, schema_out);
}

} // namespace agelab::cohort
