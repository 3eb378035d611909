#pragma once

#include "agelab/cohort/impute.hpp"
#include "agelab/model/checkpoint.hpp"
#include "agelab/nn/layers.hpp"

#include <filesystem>
#include <span>

namespace agelab::baselines {

struct DnnConfig {
    int hidden_layers = 3;
    int hidden_width = 512;
    int batch_size = 2000;
    double learning_rate = 1e-3;
    int max_epochs = 1000;
    int patience = 100;
    std::uint64_t seed = 0;
};

/// Feed-forward chronological-age regressor; BA is the predicted age.
class DnnModel {
  public:
    DnnModel(int n_features, const DnnConfig &config);

    nn::Var forward(nn::Tape &tape, const nn::Matrix &features_std) const;
    Eigen::VectorXd predict(const nn::Matrix &features_std) const;

    int feature_count() const { return n_features_; }
    const DnnConfig &config() const { return config_; }
    nn::ParameterStore &params() { return store_; }
    const nn::ParameterStore &params() const { return store_; }

    // Target standardization captured at fit time.
    double target_mean = 0.0;
    double target_sd = 1.0;

  private:
    int n_features_;
    DnnConfig config_;
    nn::ParameterStore store_;
    std::vector<nn::Linear> layers_;
};

struct DnnFitResult {
    std::vector<double> train_mse;
    std::vector<double> val_mse;
    int best_epoch = -1;
};

/// Early-stopped MSE regression of chronological age on standardized features.
/// Refuses a constant-age training target.
DnnFitResult dnn_fit(DnnModel &model, const nn::Matrix &train_features,
                     const Eigen::VectorXd &train_ca, const nn::Matrix &val_features,
                     const Eigen::VectorXd &val_ca);

std::vector<model::BaEstimate> dnn_estimate_all(const DnnModel &model,
                                                const cohort::CohortTable &cohort,
                                                std::span<const std::size_t> ids,
                                                const cohort::TrainStats &stats);

void dnn_save(const std::filesystem::path &path, const DnnModel &model,
              const cohort::TrainStats &stats, const std::string &feature_set,
              const std::string &schema_hash);

struct LoadedDnn {
    std::unique_ptr<DnnModel> model;
    cohort::TrainStats stats;
    std::string feature_set;
    std::string schema_hash;
};
LoadedDnn dnn_load(const std::filesystem::path &path);

} // namespace agelab::baselines
