#pragma once

#include "agelab/cohort/types.hpp"
#include "agelab/model/checkpoint.hpp"

#include <filesystem>
#include <span>

namespace agelab::baselines {

/// Age-cluster centroid estimator: the training subjects are binned by
/// chronological age, and a test subject's BA is the inverse-distance-weighted
/// mean CA of its nearest cluster centroids in z-scored feature space.
struct CacModel {
    struct Cluster {
        double age_lo = 0.0;
        double age_hi = 0.0;
        Eigen::VectorXd centroid; // z-scored feature means
        double mean_ca = 0.0;
        std::size_t count = 0;
    };

    std::vector<std::string> features;
    // Global z-scoring statistics from the training split.
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_sd;
    std::vector<Cluster> clusters;
    int k_neighbors = 3;
    double epsilon = 1e-6;
    std::string schema_hash;
    std::string feature_set;
};

struct CacOptions {
    double bin_width_years = 5.0;
    int k_neighbors = 3;
    double epsilon = 1e-6;
};

CacModel cac_fit(const cohort::CohortTable &cohort, std::span<const std::size_t> train_ids,
                 const std::vector<std::string> &features, const CacOptions &options = {});

/// Missing biomarkers take the cluster-space origin (training mean).
model::BaEstimate cac_estimate(const CacModel &model, const cohort::SubjectRecord &record,
                               const cohort::Schema &schema);

std::vector<model::BaEstimate> cac_estimate_all(const CacModel &model,
                                                const cohort::CohortTable &cohort,
                                                std::span<const std::size_t> ids);

void cac_save(const std::filesystem::path &path, const CacModel &model);
CacModel cac_load(const std::filesystem::path &path);

} // namespace agelab::baselines
