#pragma once

#include "agelab/cohort/impute.hpp"
#include "agelab/model/train.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <memory>

namespace agelab::model {

struct BaEstimate {
    std::string id;
    double ca = 0.0;
    double gap = 0.0;
    double ba = 0.0; // always ca + gap
};

/// Evaluation-mode estimates for a set of subjects; gap is the mean-head
/// output and ba = ca + gap exactly.
std::vector<BaEstimate> estimate_ba(const GapModel &model, const cohort::CohortTable &cohort,
                                    std::span<const std::size_t> ids,
                                    const cohort::TrainStats &stats, int eval_batch = 4096);

/// Self-describing checkpoint for the gap model: estimator kind, schema hash,
/// feature set, standardization statistics, train config, loss weights and
/// all parameters.
void save_checkpoint(const std::filesystem::path &path, const GapModel &model,
                     const cohort::TrainStats &stats, const LossWeights &weights,
                     const std::string &feature_set, const std::string &schema_hash);

struct LoadedModel {
    std::unique_ptr<GapModel> model;
    cohort::TrainStats stats;
    LossWeights weights;
    std::string feature_set;
    std::string schema_hash;
};

/// Load a checkpoint, refusing kinds other than "proposed".
LoadedModel load_checkpoint(const std::filesystem::path &path);

/// Throws when a checkpoint's schema hash does not match the data's schema.
void require_schema_hash(const std::string &checkpoint_hash, const std::string &data_hash);

// Shared serialization helpers for all estimator checkpoints.
nlohmann::json stats_to_json(const cohort::TrainStats &stats);
cohort::TrainStats stats_from_json(const nlohmann::json &j);
nlohmann::json weights_to_json(const LossWeights &weights);
LossWeights weights_from_json(const nlohmann::json &j);
nlohmann::json train_config_to_json(const TrainConfig &config);
TrainConfig train_config_from_json(const nlohmann::json &j);
nlohmann::json matrix_to_json(const nn::Matrix &m);
nn::Matrix matrix_from_json(const nlohmann::json &j);
void write_json_file(const std::filesystem::path &path, const nlohmann::json &j);
nlohmann::json read_json_file(const std::filesystem::path &path);

} // namespace agelab::model
