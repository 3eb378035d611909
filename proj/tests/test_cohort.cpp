#include "agelab/analysis/stats.hpp"
#include "agelab/cohort/generator.hpp"
#include "agelab/cohort/groups.hpp"
#include "agelab/cohort/impute.hpp"
#include "agelab/cohort/io.hpp"
#include "agelab/cohort/labeling.hpp"
#include "agelab/common/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace agelab;
using namespace agelab::cohort;

namespace {

SubjectRecord blank_record(const Schema &schema) {
    SubjectRecord r;
    r.id = "t";
    r.sex = Sex::male;
    r.chronological_age = 50.0;
    r.biomarkers.assign(schema.size(), std::nullopt);
    return r;
}

void set(SubjectRecord &r, const Schema &schema, const std::string &name, double v) {
    r.biomarkers[schema.index_of(name)] = v;
}

std::string file_contents(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("dm labeling thresholds") {
    Schema schema = default_schema();
    SubjectRecord r = blank_record(schema);
    set(r, schema, "FBS", 130.0);
    set(r, schema, "HbA1c", 5.5);
    CHECK(label_morbidity(r, schema).dm == TriState::illness);

    set(r, schema, "FBS", 95.0);
    CHECK(label_morbidity(r, schema).dm == TriState::normal);

    set(r, schema, "FBS", 110.0);
    CHECK(label_morbidity(r, schema).dm == TriState::pre);

    set(r, schema, "FBS", 95.0);
    r.dm_medication = true;
    CHECK(label_morbidity(r, schema).dm == TriState::illness);
}

TEST_CASE("hbp and dlp labeling thresholds") {
    Schema schema = default_schema();
    SubjectRecord r = blank_record(schema);
    set(r, schema, "SBP", 118.0);
    set(r, schema, "DBP", 78.0);
    CHECK(label_morbidity(r, schema).hbp == TriState::normal);
    set(r, schema, "SBP", 142.0);
    CHECK(label_morbidity(r, schema).hbp == TriState::illness);
    set(r, schema, "SBP", 125.0);
    CHECK(label_morbidity(r, schema).hbp == TriState::pre);

    set(r, schema, "LDLC", 95.0);
    set(r, schema, "TG", 120.0);
    set(r, schema, "HDLC", 65.0);
    CHECK(label_morbidity(r, schema).dlp == TriState::normal);
    set(r, schema, "HDLC", 38.0);
    CHECK(label_morbidity(r, schema).dlp == TriState::illness);
    set(r, schema, "HDLC", 55.0);
    CHECK(label_morbidity(r, schema).dlp == TriState::pre);
}

TEST_CASE("metabolic syndrome needs three conditions") {
    Schema schema = default_schema();
    SubjectRecord r = blank_record(schema);
    r.sex = Sex::male;
    set(r, schema, "WC", 92.0);   // >= 90: condition
    set(r, schema, "TG", 160.0);  // >= 150: condition
    set(r, schema, "HDLC", 38.0); // < 40: condition
    set(r, schema, "SBP", 110.0);
    set(r, schema, "DBP", 70.0);
    set(r, schema, "FBS", 95.0);
    MorbidityLabel label = label_morbidity(r, schema);
    CHECK(label.ms == BinaryState::with_disease);

    // female cutoffs differ: WC 85, HDLC 50
    r.sex = Sex::female;
    set(r, schema, "WC", 84.0);
    set(r, schema, "HDLC", 52.0);
    CHECK(label_morbidity(r, schema).ms == BinaryState::healthy);

    // blood-pressure condition requires both SBP and DBP elevated
    r.sex = Sex::male;
    set(r, schema, "WC", 92.0);
    set(r, schema, "TG", 160.0);
    set(r, schema, "HDLC", 45.0);
    set(r, schema, "SBP", 136.0);
    set(r, schema, "DBP", 80.0);
    CHECK(label_morbidity(r, schema).ms == BinaryState::healthy);
    set(r, schema, "DBP", 86.0);
    CHECK(label_morbidity(r, schema).ms == BinaryState::with_disease);
}

TEST_CASE("missing markers make a disease indeterminate, labeled pre") {
    Schema schema = default_schema();
    SubjectRecord r = blank_record(schema);
    MorbidityLabel label = label_morbidity(r, schema);
    CHECK(label.dm == TriState::pre);
    CHECK(label.is_indeterminate(Disease::dm));
    CHECK(label.is_indeterminate(Disease::hbp));
    CHECK(label.is_indeterminate(Disease::dlp));

    // a medication flag resolves the state even with missing markers
    r.dm_medication = true;
    label = label_morbidity(r, schema);
    CHECK(label.dm == TriState::illness);
    CHECK_FALSE(label.is_indeterminate(Disease::dm));
}

TEST_CASE("overall state rules") {
    Schema schema = default_schema();
    SubjectRecord r = blank_record(schema);
    set(r, schema, "FBS", 95.0);
    set(r, schema, "HbA1c", 5.4);
    set(r, schema, "SBP", 110.0);
    set(r, schema, "DBP", 70.0);
    set(r, schema, "LDLC", 90.0);
    set(r, schema, "TG", 100.0);
    set(r, schema, "HDLC", 65.0);
    set(r, schema, "WC", 80.0);
    CHECK(label_morbidity(r, schema).overall == OverallState::healthy);

    set(r, schema, "FBS", 110.0); // pre-stage only
    CHECK(label_morbidity(r, schema).overall == OverallState::average);

    r.cancer_history = true;
    CHECK(label_morbidity(r, schema).overall == OverallState::unhealthy);
}

TEST_CASE("generator determinism is byte-exact") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 200;
    CohortTable a = generate_cohort(schema, config, 7);
    CohortTable b = generate_cohort(schema, config, 7);
    const auto dir_a = std::filesystem::temp_directory_path() / "agelab_test_cohort_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "agelab_test_cohort_b";
    save_cohort(dir_a, a);
    save_cohort(dir_b, b);
    CHECK(file_contents(dir_a / "cohort.csv") == file_contents(dir_b / "cohort.csv"));
    CHECK(file_contents(dir_a / "events.csv") == file_contents(dir_b / "events.csv"));
    CohortTable c = generate_cohort(schema, config, 8);
    const auto dir_c = std::filesystem::temp_directory_path() / "agelab_test_cohort_c";
    save_cohort(dir_c, c);
    CHECK(file_contents(dir_a / "cohort.csv") != file_contents(dir_c / "cohort.csv"));
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    std::filesystem::remove_all(dir_c);
}

TEST_CASE("noiseless generator is exactly linear in age") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 100;
    config.aging_rate_sd = 0.0;
    for (auto &[name, gen] : config.features) {
        gen.noise_sd = 0.0;
    }
    CohortTable cohort = generate_cohort(schema, config, 3);
    for (const auto &r : cohort.records) {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (!r.biomarkers[j]) {
                continue; // missingness still applies
            }
            const FeatureGenSpec &gen = config.features.at(schema.at(j).name);
            const double ref =
                r.sex == Sex::male ? gen.value_at_ref_male : gen.value_at_ref_female;
            const double expected =
                ref + gen.slope * (r.chronological_age - config.reference_age);
            CHECK(*r.biomarkers[j] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("noiseless labels match closed-form threshold-crossing ages") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 2000;
    config.aging_rate_sd = 0.0;
    config.medication.p_illness = 0.0;
    config.medication.p_pre = 0.0;
    config.medication.p_base = 0.0;
    for (auto &[name, gen] : config.features) {
        gen.noise_sd = 0.0;
    }
    CohortTable cohort = generate_cohort(schema, config, 11);

    auto crossing = [&](const char *feature, double threshold, Sex sex) {
        const FeatureGenSpec &gen = config.features.at(feature);
        const double ref = sex == Sex::male ? gen.value_at_ref_male : gen.value_at_ref_female;
        return config.reference_age + (threshold - ref) / gen.slope;
    };
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto &r = cohort.records[i];
        if (!r.biomarkers[schema.index_of("FBS")] || !r.biomarkers[schema.index_of("HbA1c")]) {
            continue;
        }
        const double cross =
            std::min(crossing("FBS", 100.0, r.sex), crossing("HbA1c", 5.7, r.sex));
        const TriState expected =
            r.chronological_age < cross ? TriState::normal : TriState::pre;
        CHECK(cohort.labels[i].dm == expected);
    }
}

TEST_CASE("planted deceased correlation agrees with a 10x re-simulation") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    auto deceased_pcc = [&](std::uint64_t seed, std::size_t n) {
        GeneratorConfig c = config;
        c.subject_count = n;
        CohortTable cohort = generate_cohort(schema, c, seed);
        std::vector<double> gap, days;
        for (const auto &r : cohort.records) {
            if (r.death) {
                const double ba = r.chronological_age +
                                  c.aging_coeff * r.true_aging_rate *
                                      (r.chronological_age - c.age_min);
                gap.push_back(ba - r.chronological_age);
                days.push_back(r.death->days_to_death);
            }
        }
        REQUIRE(gap.size() >= 100);
        return analysis::pearson(gap, days);
    };
    const double small = deceased_pcc(21, 5000);
    const double large = deceased_pcc(22, 50000);
    CHECK(small < 0.0);
    CHECK(std::abs(small - large) < 0.15);
}

TEST_CASE("population group membership rules") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 3000;
    CohortTable cohort = generate_cohort(schema, config, 17);
    auto groups = assign_population_groups(cohort);

    std::set<std::size_t> super(groups[PopulationKind::super_normal].member_ids.begin(),
                                groups[PopulationKind::super_normal].member_ids.end());
    std::set<std::size_t> normal(groups[PopulationKind::normal].member_ids.begin(),
                                 groups[PopulationKind::normal].member_ids.end());
    CHECK(groups[PopulationKind::whole].member_ids.size() == cohort.size());
    CHECK(!super.empty());
    CHECK(super.size() < normal.size());
    for (std::size_t id : super) {
        CHECK(normal.count(id) == 1);
    }
    for (std::size_t id : normal) {
        const auto &label = cohort.labels[id];
        CHECK_FALSE(label.any_illness());
        if (super.count(id) == 0) {
            const bool has_pre = label.dm == TriState::pre || label.hbp == TriState::pre ||
                                 label.dlp == TriState::pre;
            CHECK(has_pre);
        }
    }
}

TEST_CASE("average group applies the two-sigma rule per sex") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 500;
    CohortTable cohort = generate_cohort(schema, config, 23);

    const std::size_t fbs = schema.index_of("FBS");
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (const auto &r : cohort.records) {
        if (r.sex == Sex::male && r.biomarkers[fbs]) {
            sum += *r.biomarkers[fbs];
            sum2 += *r.biomarkers[fbs] * *r.biomarkers[fbs];
            ++n;
        }
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);

    // plant an outlier at roughly mean + 3 sigma and a compliant subject
    SubjectRecord outlier = cohort.records[0];
    outlier.sex = Sex::male;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        outlier.biomarkers[j] = std::nullopt;
    }
    outlier.biomarkers[fbs] = mean + 3.0 * sd;
    cohort.records.push_back(outlier);
    SubjectRecord compliant = outlier;
    compliant.biomarkers[fbs] = mean;
    cohort.records.push_back(compliant);
    label_cohort(cohort);

    auto groups = assign_population_groups(cohort);
    const auto &avg = groups[PopulationKind::average].member_ids;
    std::set<std::size_t> avg_set(avg.begin(), avg.end());
    CHECK(avg_set.count(cohort.size() - 2) == 0);
    CHECK(avg_set.count(cohort.size() - 1) == 1);
}

TEST_CASE("split sizes and determinism") {
    PopulationGroup group;
    group.kind = PopulationKind::whole;
    for (std::size_t i = 0; i < 1000; ++i) {
        group.member_ids.push_back(i);
    }
    SplitSpec spec;
    spec.seed = 5;
    CohortSplit split = split_cohort(group, spec);
    CHECK(split.train.size() == 700);
    CHECK(split.val.size() == 150);
    CHECK(split.test.size() == 150);

    CohortSplit again = split_cohort(group, spec);
    CHECK(split.train == again.train);
    CHECK(split.val == again.val);
    CHECK(split.test == again.test);

    std::set<std::size_t> all;
    for (const auto *part : {&split.train, &split.val, &split.test}) {
        for (std::size_t id : *part) {
            CHECK(all.insert(id).second);
        }
    }
    CHECK(all.size() == 1000);

    std::set<std::vector<std::size_t>> tests;
    for (int r = 0; r < 3; ++r) {
        SplitSpec s;
        s.seed = 5;
        s.repeat_index = r;
        tests.insert(split_cohort(group, s).test);
    }
    CHECK(tests.size() == 3);
}

TEST_CASE("split refuses tiny groups") {
    PopulationGroup group;
    for (std::size_t i = 0; i < 9; ++i) {
        group.member_ids.push_back(i);
    }
    CHECK_THROWS_AS(split_cohort(group, SplitSpec{}), ConfigError);
}

TEST_CASE("imputation fills training means and flags the mask") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 300;
    CohortTable cohort = generate_cohort(schema, config, 31);
    std::vector<std::size_t> ids(cohort.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<std::string> features = {"HbA1c", "FBS", "Alb"};
    TrainStats stats = compute_train_stats(cohort, ids, features);

    Eigen::MatrixXd m(2, 3);
    m << 5.5, 100.0, 4.2, std::nan(""), 90.0, std::nan("");
    auto result = impute_and_mask(m, stats);
    CHECK(result.mask.row(0).sum() == 0);
    CHECK(result.mask(1, 0) == 0); // token column
    CHECK(result.mask(1, 1) == 0); // token column
    CHECK(result.mask(1, 2) == 1);
    CHECK(result.mask(1, 4) == 1);
    CHECK(result.values(1, 0) == doctest::Approx(stats.mean[0]));
    CHECK(result.values(1, 2) == doctest::Approx(stats.mean[2]));
    CHECK(result.values(0, 0) == 5.5);
}

TEST_CASE("imputed cells reproduce training means exactly") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 400;
    CohortTable cohort = generate_cohort(schema, config, 37);
    std::vector<std::size_t> ids(cohort.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<std::string> features = {"hsCRP", "FEV1", "TG"};
    TrainStats stats = compute_train_stats(cohort, ids, features);
    Eigen::MatrixXd raw = extract_features(cohort, ids, features);
    auto result = impute_and_mask(raw, stats);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        for (Eigen::Index j = 0; j < raw.cols(); ++j) {
            if (result.mask(i, j + 2) == 1) {
                CHECK(result.values(i, j) == stats.mean[static_cast<std::size_t>(j)]);
            } else {
                CHECK(result.values(i, j) == raw(i, j));
            }
        }
    }
}

TEST_CASE("feature never measured in training is dropped") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 50;
    CohortTable cohort = generate_cohort(schema, config, 41);
    for (auto &r : cohort.records) {
        r.biomarkers[schema.index_of("CEA")] = std::nullopt;
    }
    std::vector<std::size_t> ids(cohort.size());
    std::iota(ids.begin(), ids.end(), 0);
    TrainStats stats = compute_train_stats(cohort, ids, {"HbA1c", "CEA"});
    CHECK(stats.features == std::vector<std::string>{"HbA1c"});
    CHECK(stats.dropped == std::vector<std::string>{"CEA"});
}

TEST_CASE("labeling is a pure function of the record") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 200;
    CohortTable cohort = generate_cohort(schema, config, 43);
    CohortTable reversed = cohort;
    std::reverse(reversed.records.begin(), reversed.records.end());
    label_cohort(reversed);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        CHECK(cohort.labels[i].overall == reversed.labels[cohort.size() - 1 - i].overall);
        CHECK(cohort.labels[i].dm == reversed.labels[cohort.size() - 1 - i].dm);
    }
}

TEST_CASE("cohort roundtrips through the file format") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 120;
    CohortTable cohort = generate_cohort(schema, config, 47);
    const auto dir = std::filesystem::temp_directory_path() / "agelab_test_roundtrip";
    save_cohort(dir, cohort);
    CohortTable loaded = load_cohort(dir);
    REQUIRE(loaded.size() == cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        CHECK(loaded.records[i].id == cohort.records[i].id);
        CHECK(loaded.records[i].sex == cohort.records[i].sex);
        CHECK(loaded.records[i].chronological_age ==
              doctest::Approx(cohort.records[i].chronological_age).epsilon(1e-15));
        CHECK(loaded.records[i].death.has_value() == cohort.records[i].death.has_value());
        if (cohort.records[i].death) {
            CHECK(loaded.records[i].death->days_to_death ==
                  cohort.records[i].death->days_to_death);
        }
        CHECK(loaded.records[i].dm_onset_days == cohort.records[i].dm_onset_days);
        CHECK(loaded.labels[i].overall == cohort.labels[i].overall);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("generator rejects invalid configs") {
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 0;
    CHECK_THROWS_AS(generate_cohort(schema, config, 1), ConfigError);
    config = default_generator_config();
    config.male_fraction = 1.5;
    CHECK_THROWS_AS(generate_cohort(schema, config, 1), ConfigError);
    config = default_generator_config();
    config.features.at("FBS").noise_sd = -1.0;
    CHECK_THROWS_AS(generate_cohort(schema, config, 1), ConfigError);
}
