#pragma once

#include "agelab/analysis/feature_sets.hpp"
#include "agelab/baselines/cac.hpp"
#include "agelab/baselines/dnn.hpp"
#include "agelab/baselines/kdm.hpp"
#include "agelab/cohort/generator.hpp"
#include "agelab/model/config.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace agelab::runner {

inline constexpr const char *kVersionTag = "agelab 0.1.0";

struct ExperimentConfig {
    cohort::Schema schema;
    cohort::GeneratorConfig generator;
    std::uint64_t generator_seed = 12345;
    std::vector<cohort::PopulationKind> populations = {cohort::PopulationKind::whole};
    std::vector<analysis::FeatureSetName> feature_sets = {analysis::FeatureSetName::base};
    std::vector<std::string> models = {"proposed", "kdm", "cac", "dnn"};
    analysis::FeatureSetOptions feature_options;
    model::LossWeights weights;
    model::TrainConfig train;
    baselines::DnnConfig dnn;
    baselines::KdmOptions kdm;
    baselines::CacOptions cac;
    std::vector<std::uint64_t> seeds = {101, 202, 303};
    /// Grid sexes: "male"/"female" for sex-separated models, or "all" pooled.
    std::vector<std::string> sexes = {"male", "female"};
    double gap_threshold_low = -1.0;
    double gap_threshold_high = 1.0;
    int workers = 1;
    std::filesystem::path out_dir = "out";

    void validate() const;
};

ExperimentConfig default_experiment_config();

/// Load a config file; unspecified keys keep their defaults.
ExperimentConfig load_experiment_config(const std::filesystem::path &path);
void save_experiment_config(const std::filesystem::path &path, const ExperimentConfig &config);

/// Hash of every result-affecting field (output directory and worker count
/// excluded).
std::string config_hash(const ExperimentConfig &config);

nlohmann::json experiment_config_to_json(const ExperimentConfig &config);
ExperimentConfig experiment_config_from_json(const nlohmann::json &j);

} // namespace agelab::runner
