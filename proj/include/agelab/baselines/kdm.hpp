#pragma once

#include "agelab/cohort/types.hpp"
#include "agelab/model/checkpoint.hpp"

#include <filesystem>
#include <span>

namespace agelab::baselines {

/// Precision-weighted biomarker-deviation estimator built on per-feature
/// age regressions.
struct KdmModel {
    enum class Variant { without_ca, with_ca_term };

    struct FeatureLine {
        std::string name;
        double slope = 0.0;      // k
        double intercept = 0.0;  // q
        double residual_sd = 0.0; // s, floored at s_floor
    };

    Variant variant = Variant::without_ca;
    std::vector<FeatureLine> lines;
    /// Spread of (BA - CA) over the training split, used by the CA-term variant.
    double s_ba = 1.0;
    double s_floor = 1e-6;
    std::string schema_hash;
    std::string feature_set;
};

struct KdmOptions {
    KdmModel::Variant variant = KdmModel::Variant::without_ca;
    /// Features with |slope| below this are dropped as age-uninformative.
    double min_abs_slope = 1e-8;
    double s_floor = 1e-6;
};

KdmModel kdm_fit(const cohort::CohortTable &cohort, std::span<const std::size_t> train_ids,
                 const std::vector<std::string> &features, const KdmOptions &options = {});

/// BA for one record; missing biomarkers drop out of the weighted sums.
/// Refuses records with every fitted feature missing.
model::BaEstimate kdm_estimate(const KdmModel &model, const cohort::SubjectRecord &record,
                               const cohort::Schema &schema);

std::vector<model::BaEstimate> kdm_estimate_all(const KdmModel &model,
                                                const cohort::CohortTable &cohort,
                                                std::span<const std::size_t> ids);

void kdm_save(const std::filesystem::path &path, const KdmModel &model);
KdmModel kdm_load(const std::filesystem::path &path);

} // namespace agelab::baselines
