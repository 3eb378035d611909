#include "agelab/runner/config.hpp"

#include "agelab/common/error.hpp"
#include "agelab/common/fnv.hpp"
#include "agelab/model/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace agelab::runner {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (seeds.empty()) {
        throw ConfigError("experiment: need at least one seed");
    }
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) {
        throw ConfigError("experiment: seeds must be distinct");
    }
    if (populations.empty() || feature_sets.empty() || models.empty()) {
        throw ConfigError("experiment: populations, feature_sets and models must be non-empty");
    }
    for (const auto &m : models) {
        if (m != "proposed" && m != "kdm" && m != "cac" && m != "dnn") {
            throw ConfigError("experiment: unknown model " + m);
        }
    }
    if (sexes.empty()) {
        throw ConfigError("experiment: sexes must be non-empty");
    }
    for (const auto &s : sexes) {
        if (s != "male" && s != "female" && s != "all") {
            throw ConfigError("experiment: unknown sex " + s);
        }
    }
    generator.validate(schema);
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig config;
    config.schema = cohort::default_schema();
    config.generator = cohort::default_generator_config();
    return config;
}

namespace {

json dnn_to_json(const baselines::DnnConfig &c) {
    return json{{"hidden_layers", c.hidden_layers}, {"hidden_width", c.hidden_width},
                {"batch_size", c.batch_size},       {"learning_rate", c.learning_rate},
                {"max_epochs", c.max_epochs},       {"patience", c.patience},
                {"seed", c.seed}};
}

baselines::DnnConfig dnn_from_json(const json &j, baselines::DnnConfig c) {
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    return c;
}

} // namespace

json experiment_config_to_json(const ExperimentConfig &config) {
    json j;
    j["generator_seed"] = config.generator_seed;
    {
        json pops = json::array();
        for (auto p : config.populations) {
            pops.push_back(to_string(p));
        }
        j["populations"] = std::move(pops);
    }
    {
        json sets = json::array();
        for (auto f : config.feature_sets) {
            sets.push_back(analysis::to_string(f));
        }
        j["feature_sets"] = std::move(sets);
    }
    j["models"] = config.models;
    j["base_members"] = config.feature_options.base_members;
    j["morbidity_members"] = config.feature_options.morbidity_members;
    j["weights"] = model::weights_to_json(config.weights);
    j["train"] = model::train_config_to_json(config.train);
    j["dnn"] = dnn_to_json(config.dnn);
    j["kdm"] = json{{"variant", config.kdm.variant == baselines::KdmModel::Variant::without_ca
                                    ? "without_ca"
                                    : "with_ca_term"},
                    {"min_abs_slope", config.kdm.min_abs_slope},
                    {"s_floor", config.kdm.s_floor}};
    j["cac"] = json{{"bin_width_years", config.cac.bin_width_years},
                    {"k_neighbors", config.cac.k_neighbors},
                    {"epsilon", config.cac.epsilon}};
    j["seeds"] = config.seeds;
    j["sexes"] = config.sexes;
    j["gap_threshold_low"] = config.gap_threshold_low;
    j["gap_threshold_high"] = config.gap_threshold_high;
    j["workers"] = config.workers;
    j["out_dir"] = config.out_dir.string();
    return j;
}

ExperimentConfig experiment_config_from_json(const json &j) {
    ExperimentConfig config = default_experiment_config();
    config.generator_seed = j.value("generator_seed", config.generator_seed);
    if (j.contains("populations")) {
        config.populations.clear();
        for (const auto &p : j["populations"]) {
            config.populations.push_back(cohort::population_from_string(p.get<std::string>()));
        }
    }
    if (j.contains("feature_sets")) {
        config.feature_sets.clear();
        for (const auto &f : j["feature_sets"]) {
            config.feature_sets.push_back(
                analysis::feature_set_from_string(f.get<std::string>()));
        }
    }
    if (j.contains("models")) {
        config.models = j["models"].get<std::vector<std::string>>();
    }
    if (j.contains("base_members")) {
        config.feature_options.base_members =
            j["base_members"].get<std::vector<std::string>>();
    }
    if (j.contains("morbidity_members")) {
        config.feature_options.morbidity_members =
            j["morbidity_members"].get<std::vector<std::string>>();
    }
    if (j.contains("weights")) {
        config.weights = model::weights_from_json(j["weights"]);
    }
    if (j.contains("train")) {
        config.train = model::train_config_from_json(j["train"]);
    }
    if (j.contains("dnn")) {
        config.dnn = dnn_from_json(j["dnn"], config.dnn);
    }
    if (j.contains("kdm")) {
        const json &k = j["kdm"];
        config.kdm.variant = k.value("variant", std::string("without_ca")) == "with_ca_term"
                                 ? baselines::KdmModel::Variant::with_ca_term
                                 : baselines::KdmModel::Variant::without_ca;
        config.kdm.min_abs_slope = k.value("min_abs_slope", config.kdm.min_abs_slope);
        config.kdm.s_floor = k.value("s_floor", config.kdm.s_floor);
    }
    if (j.contains("cac")) {
        const json &c = j["cac"];
        config.cac.bin_width_years = c.value("bin_width_years", config.cac.bin_width_years);
        config.cac.k_neighbors = c.value("k_neighbors", config.cac.k_neighbors);
        config.cac.epsilon = c.value("epsilon", config.cac.epsilon);
    }
    if (j.contains("seeds")) {
        config.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    if (j.contains("sexes")) {
        config.sexes = j["sexes"].get<std::vector<std::string>>();
    }
    config.gap_threshold_low = j.value("gap_threshold_low", config.gap_threshold_low);
    config.gap_threshold_high = j.value("gap_threshold_high", config.gap_threshold_high);
    config.workers = j.value("workers", config.workers);
    config.out_dir = j.value("out_dir", config.out_dir.string());
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path &path) {
    json j = model::read_json_file(path);
    ExperimentConfig config = experiment_config_from_json(j);
    if (j.contains("generator")) {
        config.generator = cohort::generator_from_json(j["generator"], config.schema);
    }
    config.validate();
    return config;
}

void save_experiment_config(const std::filesystem::path &path, const ExperimentConfig &config) {
    json j = experiment_config_to_json(config);
    j["generator"] = cohort::generator_to_json(config.schema, config.generator);
    model::write_json_file(path, j);
}

std::string config_hash(const ExperimentConfig &config) {
    json j = experiment_config_to_json(config);
    j.erase("out_dir");
    j.erase("workers");
    j["generator"] = cohort::generator_to_json(config.schema, config.generator);
    return util::fnv1a64_hex(j.dump());
}

} // namespace agelab::runner
