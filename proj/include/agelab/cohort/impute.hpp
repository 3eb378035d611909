#pragma once

#include "agelab/cohort/types.hpp"

#include <Eigen/Core>

#include <span>

namespace agelab::cohort {

/// Per-feature training statistics used for imputation and standardization.
/// Features never observed in the training split are dropped and listed.
struct TrainStats {
    std::vector<std::string> features;
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<std::size_t> observed_count;
    std::vector<double> missing_rate;
    std::vector<std::string> dropped;

    std::size_t size() const { return features.size(); }
};

TrainStats compute_train_stats(const CohortTable &cohort, std::span<const std::size_t> train_ids,
                               const std::vector<std::string> &feature_names);

/// Feature matrix for the given subjects and features; missing values are NaN.
Eigen::MatrixXd extract_features(const CohortTable &cohort, std::span<const std::size_t> ids,
                                 const std::vector<std::string> &feature_names);

struct ImputeResult {
    /// Subjects x features, missing cells replaced by the training mean.
    Eigen::MatrixXd values;
    /// Subjects x (features + 2): column 0 and 1 are the token positions and
    /// always 0; column j+2 is 1 where feature j was imputed.
    Eigen::MatrixXi mask;
};

/// Mean-impute a feature matrix whose columns align with stats.features.
ImputeResult impute_and_mask(const Eigen::MatrixXd &features_with_nan, const TrainStats &stats);

} // namespace agelab::cohort
