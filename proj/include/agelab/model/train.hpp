#pragma once

#include "agelab/cohort/impute.hpp"
#include "agelab/model/corrected.hpp"
#include "agelab/model/losses.hpp"
#include "agelab/model/network.hpp"

#include <span>

namespace agelab::model {

/// Standardized model inputs for a list of subjects.
struct PreparedData {
    nn::Matrix features; // standardized, imputed
    Eigen::MatrixXi mask;
    Eigen::VectorXd ca;
    std::vector<int> deceased_rows;
    Eigen::VectorXd days_to_death; // aligned with deceased_rows
    std::vector<int> paired_rows;  // rows with an informative corrected pair
    nn::Matrix corrected_features; // standardized; rows aligned with paired_rows
    std::vector<std::size_t> ids;  // original cohort indices
};

PreparedData prepare_inputs(const cohort::CohortTable &cohort,
                            std::span<const std::size_t> ids,
                            const cohort::TrainStats &stats,
                            const CorrectionTable *corrections);

struct EpochStats {
    int epoch = 0;
    // Unweighted per-part means over the epoch's batches.
    std::array<double, 6> train_parts{};
    double train_total = 0.0;
    std::array<double, 6> val_parts{};
    double val_total = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    int stopped_epoch = -1;
    double best_val_total = 0.0;
    int mortality_skips = 0;
};

/// Joint training of all six losses with Adam, early stopping on the weighted
/// validation total, and restoration of the best-validation parameters.
/// Deterministic given config.seed. Throws on divergence, naming the epoch.
TrainResult train(GapModel &model, const PreparedData &train_data, const PreparedData &val_data,
                  const LossWeights &weights, const TrainConfig &config);

} // namespace agelab::model
