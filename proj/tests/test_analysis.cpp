#include "agelab/analysis/correlation_report.hpp"
#include "agelab/analysis/feature_sets.hpp"
#include "agelab/analysis/stats.hpp"
#include "agelab/cohort/generator.hpp"
#include "agelab/cohort/groups.hpp"
#include "agelab/cohort/labeling.hpp"
#include "agelab/common/error.hpp"
#include "agelab/common/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace agelab;
using namespace agelab::analysis;

TEST_CASE("pearson basics") {
    std::vector<double> x{1, 2, 3};
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
    // direct covariance arithmetic: cov=1, sd_x=sqrt(2/3), sd_y=sqrt(14)/3
    CHECK(pearson(x, std::vector<double>{1, 2, 4}) ==
          doctest::Approx(0.9819805060619659).epsilon(1e-12));
}

TEST_CASE("pearson error cases") {
    std::vector<double> constant{2, 2, 2};
    std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(pearson(constant, x), UndefinedStatisticError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}),
                    UndefinedStatisticError);
}

TEST_CASE("pearson affine invariance and symmetry") {
    util::Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x, y;
        for (int i = 0; i < 30; ++i) {
            x.push_back(rng.normal());
            y.push_back(rng.normal() + 0.5 * x.back());
        }
        const double r = pearson(x, y);
        CHECK(std::abs(r) <= 1.0 + 1e-12);
        CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-12));
        std::vector<double> scaled = x;
        for (double &v : scaled) {
            v = 2.5 * v + 7.0;
        }
        CHECK(pearson(scaled, y) == doctest::Approx(r).epsilon(1e-10));
    }
}

TEST_CASE("spearman basics and ties") {
    std::vector<double> x{1, 2, 3};
    CHECK(spearman(x, std::vector<double>{1, 4, 9}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{9, 4, 1}) == doctest::Approx(-1.0));

    // ties: explicit average-rank table, then the plain covariance formula
    std::vector<double> xt{1, 2, 2, 4};
    std::vector<double> yt{1, 3, 2, 4};
    std::vector<double> rx{1.0, 2.5, 2.5, 4.0};
    std::vector<double> ry{1.0, 3.0, 2.0, 4.0};
    CHECK(spearman(xt, yt) == doctest::Approx(pearson(rx, ry)).epsilon(1e-12));
}

TEST_CASE("spearman equals the no-tie closed form on distinct data") {
    util::Rng rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x, y;
        for (int i = 0; i < 25; ++i) {
            x.push_back(rng.normal());
            y.push_back(rng.normal());
        }
        const std::vector<double> rx = average_ranks(x);
        const std::vector<double> ry = average_ranks(y);
        double sum_d2 = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) {
            sum_d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        }
        const double n = static_cast<double>(x.size());
        const double closed = 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
        CHECK(spearman(x, y) == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("spearman invariant under strictly monotone transforms") {
    util::Rng rng(7);
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(rng.normal());
        y.push_back(rng.normal());
    }
    const double base = spearman(x, y);
    std::vector<double> tx = x;
    for (double &v : tx) {
        v = std::exp(v);
    }
    std::vector<double> ty = y;
    for (double &v : ty) {
        v = v * v * v + 2.0 * v;
    }
    CHECK(spearman(tx, y) == doctest::Approx(base).epsilon(1e-12));
    CHECK(spearman(x, ty) == doctest::Approx(base).epsilon(1e-12));
}

namespace {

/// Second, independent MI path: map-based joint counting.
double mi_oracle(const std::vector<double> &x, const std::vector<double> &y, int bins) {
    auto bin_of = [bins](const std::vector<double> &v, double value) {
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        if (hi == lo) {
            return 0;
        }
        int b = static_cast<int>((value - lo) / (hi - lo) * bins);
        return std::min(std::max(b, 0), bins - 1);
    };
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> px, py;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int a = bin_of(x, x[i]);
        const int b = bin_of(y, y[i]);
        joint[{a, b}] += 1.0;
        px[a] += 1.0;
        py[b] += 1.0;
    }
    const double n = static_cast<double>(x.size());
    double mi = 0.0;
    for (const auto &[ab, c] : joint) {
        const double pab = c / n;
        mi += pab * std::log(pab / (px[ab.first] / n * py[ab.second] / n));
    }
    return mi;
}

} // namespace

TEST_CASE("mutual information estimator") {
    util::Rng rng(11);
    std::vector<double> x, y_indep, y_dep;
    for (int i = 0; i < 100000; ++i) {
        x.push_back(rng.uniform());
        y_indep.push_back(rng.uniform());
        y_dep.push_back(x.back() + 0.05 * rng.normal());
    }
    // independence: near zero within plug-in estimator bias
    CHECK(mutual_information(x, y_indep, 8) < 0.01);
    // identity: equals the binned entropy
    CHECK(mutual_information(x, x, 8) == doctest::Approx(binned_entropy(x, 8)).epsilon(1e-12));
    // dependent case matches the independent histogram implementation
    CHECK(mutual_information(x, y_dep, 8) ==
          doctest::Approx(mi_oracle(x, y_dep, 8)).epsilon(1e-9));
    // non-negativity and the self-information bound
    CHECK(mutual_information(x, y_dep, 8) >= 0.0);
    CHECK(mutual_information(x, x, 8) >= mutual_information(x, y_dep, 8));
}

TEST_CASE("mutual information input checks") {
    std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(mutual_information(x, x, 1), AgelabError);
    CHECK_THROWS_AS(mutual_information(x, x, 4), AgelabError);
}

namespace {

/// Small custom cohort whose features have known slope/noise structure.
cohort::CohortTable analytic_cohort(std::size_t n) {
    using namespace agelab::cohort;
    std::vector<FeatureSpec> specs;
    for (const char *name : {"AgeLine", "Strong", "Weak", "Pure_noise", "Sparse"}) {
        FeatureSpec f;
        f.name = name;
        specs.push_back(f);
    }
    specs[4].missing_rate = 0.6;
    Schema schema{specs};

    CohortTable cohort;
    cohort.schema = schema;
    util::Rng rng(5);
    for (std::size_t i = 0; i < n; ++i) {
        SubjectRecord r;
        r.id = "a" + std::to_string(i);
        r.sex = i % 2 == 0 ? Sex::male : Sex::female;
        r.chronological_age = rng.uniform(20.0, 85.0);
        r.biomarkers.resize(schema.size());
        r.biomarkers[0] = r.chronological_age;
        r.biomarkers[1] = 0.5 * r.chronological_age + rng.normal(0.0, 2.0);
        r.biomarkers[2] = 0.05 * r.chronological_age + rng.normal(0.0, 5.0);
        r.biomarkers[3] = rng.normal(0.0, 1.0);
        r.biomarkers[4] = rng.bernoulli(0.6)
                              ? std::optional<double>()
                              : std::optional<double>(rng.normal(0.0, 1.0));
        cohort.records.push_back(std::move(r));
    }
    label_cohort(cohort);
    return cohort;
}

} // namespace

TEST_CASE("age-correlation report flags and exclusions") {
    using namespace agelab::cohort;
    CohortTable cohort = analytic_cohort(2000);
    PopulationGroup whole;
    whole.kind = PopulationKind::whole;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        whole.member_ids.push_back(i);
    }
    CorrelationReport report = select_age_correlated_features(cohort, whole);

    auto row_of = [&](const std::string &feature, const std::string &sex) {
        for (const auto &row : report.rows) {
            if (row.feature == feature && row.sex == sex) {
                return row;
            }
        }
        REQUIRE(false);
        return report.rows.front();
    };

    // the feature equal to age is flagged by all three statistics
    const CorrelationRow age_line = row_of("AgeLine", "all");
    CHECK(age_line.top_pcc);
    CHECK(age_line.top_srocc);
    CHECK(age_line.top_mi);
    CHECK(*age_line.pcc == doctest::Approx(1.0).epsilon(1e-9));

    // sparse feature excluded regardless of correlation
    const CorrelationRow sparse = row_of("Sparse", "all");
    CHECK(sparse.excluded_missing);
    CHECK_FALSE(sparse.top_pcc);

    // report covers combined plus both sexes
    std::size_t all_rows = 0, male_rows = 0, female_rows = 0;
    for (const auto &row : report.rows) {
        all_rows += row.sex == "all";
        male_rows += row.sex == "male";
        female_rows += row.sex == "female";
    }
    CHECK(all_rows == cohort.schema.size());
    CHECK(male_rows == cohort.schema.size());
    CHECK(female_rows == cohort.schema.size());
}

TEST_CASE("report is invariant under row permutation") {
    using namespace agelab::cohort;
    CohortTable cohort = analytic_cohort(500);
    PopulationGroup whole;
    whole.kind = PopulationKind::whole;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        whole.member_ids.push_back(i);
    }
    CorrelationReport report = select_age_correlated_features(cohort, whole);

    CohortTable reversed = cohort;
    std::reverse(reversed.records.begin(), reversed.records.end());
    label_cohort(reversed);
    CorrelationReport report_rev = select_age_correlated_features(reversed, whole);
    REQUIRE(report.rows.size() == report_rev.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(report.rows[i].feature == report_rev.rows[i].feature);
        CHECK(report.rows[i].pcc.has_value() == report_rev.rows[i].pcc.has_value());
        if (report.rows[i].pcc) {
            CHECK(*report.rows[i].pcc ==
                  doctest::Approx(*report_rev.rows[i].pcc).epsilon(1e-12));
        }
        CHECK(report.rows[i].top_pcc == report_rev.rows[i].top_pcc);
    }
}

TEST_CASE("lung-function feature flagged in whole and super-normal groups") {
    using namespace agelab::cohort;
    Schema schema = default_schema();
    GeneratorConfig config = default_generator_config();
    config.subject_count = 6000;
    CohortTable cohort = generate_cohort(schema, config, 61);
    auto groups = assign_population_groups(cohort);
    REQUIRE(groups[PopulationKind::super_normal].member_ids.size() >= 60);

    for (PopulationKind kind : {PopulationKind::whole, PopulationKind::super_normal}) {
        CorrelationReport report = select_age_correlated_features(cohort, groups[kind]);
        auto flagged = report.flagged_features("all", to_string(kind));
        CHECK(std::find(flagged.begin(), flagged.end(), "FEV1") != flagged.end());
    }
}

TEST_CASE("empty group refused") {
    using namespace agelab::cohort;
    CohortTable cohort = analytic_cohort(50);
    PopulationGroup empty;
    empty.kind = PopulationKind::super_normal;
    CHECK_THROWS_AS(select_age_correlated_features(cohort, empty), AgelabError);
}

TEST_CASE("feature set construction") {
    cohort::Schema schema = cohort::default_schema();
    FeatureSet base = build_feature_set(FeatureSetName::base, schema);
    FeatureSet morbidity = build_feature_set(FeatureSetName::morbidity_related, schema);
    FeatureSet entire = build_feature_set(FeatureSetName::entire, schema);

    CHECK(base.members.size() == 13);
    CHECK(morbidity.members.size() == base.members.size() + 6);
    for (const auto &m : base.members) {
        CHECK(std::find(morbidity.members.begin(), morbidity.members.end(), m) !=
              morbidity.members.end());
    }
    CHECK(base.members.size() < morbidity.members.size());

    // entire excludes CA-derived and impedance features
    for (const char *excluded :
         {"eGFR_CKD_EPI", "FVC_percentile", "Visceral_fat_area", "Intracellular_fluid"}) {
        CHECK(std::find(entire.members.begin(), entire.members.end(), excluded) ==
              entire.members.end());
    }
    CHECK(std::find(entire.members.begin(), entire.members.end(), "CEA") !=
          entire.members.end()); // tumor markers stay in the entire set

    // the KDM screen drops tumor markers, eyesight, categorical
    auto kdm = kdm_feature_screen(schema);
    for (const char *excluded : {"CEA", "Eyesight_L", "Smoking_status"}) {
        CHECK(std::find(kdm.begin(), kdm.end(), excluded) == kdm.end());
    }
}

TEST_CASE("a twelve-member base yields an eighteen-member morbidity set") {
    cohort::Schema schema = cohort::default_schema();
    FeatureSetOptions options;
    options.base_members = {"RBC",   "MCV", "WC",   "SMM", "BFM",   "FFM",
                            "hsCRP", "Cr",  "FEV1", "FVC", "HbA1c", "Alb"};
    FeatureSet morbidity = build_feature_set(FeatureSetName::morbidity_related, schema, options);
    CHECK(morbidity.members.size() == 18);
}

TEST_CASE("feature set errors name the missing member") {
    cohort::Schema schema = cohort::default_schema();
    FeatureSetOptions options;
    options.base_members = {"RBC", "NotAFeature"};
    try {
        build_feature_set(FeatureSetName::base, schema, options);
        CHECK(false);
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("NotAFeature") != std::string::npos);
    }
}
