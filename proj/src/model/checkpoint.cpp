#include "agelab/model/checkpoint.hpp"

#include "agelab/common/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace agelab::model {

using nlohmann::json;

std::vector<BaEstimate> estimate_ba(const GapModel &model, const cohort::CohortTable &cohort,
                                    std::span<const std::size_t> ids,
                                    const cohort::TrainStats &stats, int eval_batch) {
    if (static_cast<int>(stats.size()) != model.feature_count()) {
        throw AgelabError("estimate_ba: feature count mismatch with the model");
    }
    std::vector<BaEstimate> out;
    out.reserve(ids.size());
    for (std::size_t start = 0; start < ids.size(); start += static_cast<std::size_t>(eval_batch)) {
        const std::size_t stop = std::min(ids.size(), start + static_cast<std::size_t>(eval_batch));
        std::span<const std::size_t> chunk(ids.data() + start, stop - start);
        PreparedData data = prepare_inputs(cohort, chunk, stats, nullptr);
        Eigen::VectorXd gaps = model.evaluate_gap(data.features, data.mask);
        for (Eigen::Index i = 0; i < gaps.size(); ++i) {
            const auto &record = cohort.records[chunk[static_cast<std::size_t>(i)]];
            BaEstimate est;
            est.id = record.id;
            est.ca = record.chronological_age;
            est.gap = gaps(i);
            est.ba = est.ca + est.gap;
            out.push_back(std::move(est));
        }
    }
    return out;
}

json stats_to_json(const cohort::TrainStats &stats) {
    return json{{"features", stats.features},      {"mean", stats.mean},
                {"sd", stats.sd},                  {"observed_count", stats.observed_count},
                {"missing_rate", stats.missing_rate}, {"dropped", stats.dropped}};
}

cohort::TrainStats stats_from_json(const json &j) {
    cohort::TrainStats stats;
    stats.features = j.at("features").get<std::vector<std::string>>();
    stats.mean = j.at("mean").get<std::vector<double>>();
    stats.sd = j.at("sd").get<std::vector<double>>();
    stats.observed_count = j.at("observed_count").get<std::vector<std::size_t>>();
    stats.missing_rate = j.at("missing_rate").get<std::vector<double>>();
    stats.dropped = j.at("dropped").get<std::vector<std::string>>();
    return stats;
}

json weights_to_json(const LossWeights &w) {
    return json{{"reconstruction", w.reconstruction},
                {"ca", w.ca},
                {"dist", w.dist},
                {"consistency", w.consistency},
                {"contrastive", w.contrastive},
                {"mortality", w.mortality},
                {"ca_r2", w.ca_r2},
                {"margin", w.margin},
                {"penalize_low_r2", w.penalize_low_r2},
                {"contrast_mode", to_string(w.contrast_mode)}};
}

LossWeights weights_from_json(const json &j) {
    LossWeights w;
    w.reconstruction = j.value("reconstruction", w.reconstruction);
    w.ca = j.value("ca", w.ca);
    w.dist = j.value("dist", w.dist);
    w.consistency = j.value("consistency", w.consistency);
    w.contrastive = j.value("contrastive", w.contrastive);
    w.mortality = j.value("mortality", w.mortality);
    w.ca_r2 = j.value("ca_r2", w.ca_r2);
    w.margin = j.value("margin", w.margin);
    w.penalize_low_r2 = j.value("penalize_low_r2", w.penalize_low_r2);
    w.contrast_mode = contrast_mode_from_string(j.value("contrast_mode", "difference"));
    return w;
}

json train_config_to_json(const TrainConfig &c) {
    return json{{"batch_size", c.batch_size},   {"learning_rate", c.learning_rate},
                {"max_epochs", c.max_epochs},   {"patience", c.patience},
                {"depth", c.depth},             {"heads", c.heads},
                {"embed_width", c.embed_width}, {"ff_width", c.ff_width},
                {"head_hidden", c.head_hidden}, {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json &j) {
    TrainConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.depth = j.value("depth", c.depth);
    c.heads = j.value("heads", c.heads);
    c.embed_width = j.value("embed_width", c.embed_width);
    c.ff_width = j.value("ff_width", c.ff_width);
    c.head_hidden = j.value("head_hidden", c.head_hidden);
    c.seed = j.value("seed", c.seed);
    return c;
}

json matrix_to_json(const nn::Matrix &m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    Eigen::Map<nn::Matrix>(data.data(), m.rows(), m.cols()) = m;
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

nn::Matrix matrix_from_json(const json &j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw AgelabError("matrix_from_json: size mismatch");
    }
    return Eigen::Map<nn::Matrix>(data.data(), rows, cols);
}

void write_json_file(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path);
    if (!out) {
        throw AgelabError("cannot write: " + path.string());
    }
    out << j.dump() << '\n';
}

json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw AgelabError("cannot open: " + path.string());
    }
    return json::parse(in);
}

void require_schema_hash(const std::string &checkpoint_hash, const std::string &data_hash) {
    if (checkpoint_hash != data_hash) {
        throw AgelabError("checkpoint schema hash " + checkpoint_hash +
                          " does not match data schema hash " + data_hash);
    }
}

void save_checkpoint(const std::filesystem::path &path, const GapModel &model,
                     const cohort::TrainStats &stats, const LossWeights &weights,
                     const std::string &feature_set, const std::string &schema_hash) {
    json j;
    j["kind"] = "proposed";
    j["schema_hash"] = schema_hash;
    j["feature_set"] = feature_set;
    j["stats"] = stats_to_json(stats);
    j["weights"] = weights_to_json(weights);
    j["train_config"] = train_config_to_json(model.config());
    json params = json::object();
    for (const auto &[name, p] : model.params().all()) {
        params[name] = matrix_to_json(p.value);
    }
    j["params"] = std::move(params);
    write_json_file(path, j);
}

LoadedModel load_checkpoint(const std::filesystem::path &path) {
    json j = read_json_file(path);
    if (j.at("kind").get<std::string>() != "proposed") {
        throw AgelabError("checkpoint is not a proposed-model checkpoint: " + path.string());
    }
    LoadedModel loaded;
    loaded.schema_hash = j.at("schema_hash").get<std::string>();
    loaded.feature_set = j.at("feature_set").get<std::string>();
    loaded.stats = stats_from_json(j.at("stats"));
    loaded.weights = weights_from_json(j.at("weights"));
    TrainConfig config = train_config_from_json(j.at("train_config"));
    loaded.model = std::make_unique<GapModel>(static_cast<int>(loaded.stats.size()), config);
    std::map<std::string, nn::Matrix> snap;
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
        snap[it.key()] = matrix_from_json(it.value());
    }
    loaded.model->params().restore(snap);
    return loaded;
}

} // namespace agelab::model
