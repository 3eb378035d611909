#include "agelab/baselines/dnn.hpp"

#include "agelab/common/error.hpp"
#include "agelab/model/train.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>

namespace agelab::baselines {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nlohmann::json;

DnnModel::DnnModel(int n_features, const DnnConfig &config)
    : n_features_(n_features), config_(config) {
    util::Rng rng(util::derive_seed(config.seed, 0xd22u));
    Eigen::Index in = n_features;
    for (int i = 0; i < config.hidden_layers; ++i) {
        layers_.emplace_back(store_, "fc" + std::to_string(i), in, config.hidden_width, rng);
        in = config.hidden_width;
    }
    layers_.emplace_back(store_, "out", in, 1, rng);
}

Var DnnModel::forward(Tape &tape, const Matrix &features_std) const {
    Var h = tape.constant(features_std);
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
        h = relu(layers_[i](tape, h));
    }
    return layers_.back()(tape, h);
}

Eigen::VectorXd DnnModel::predict(const Matrix &features_std) const {
    Tape tape;
    Var out = forward(tape, features_std);
    return (out.value().col(0).array() * target_sd + target_mean).matrix();
}

DnnFitResult dnn_fit(DnnModel &model, const Matrix &train_features,
                     const Eigen::VectorXd &train_ca, const Matrix &val_features,
                     const Eigen::VectorXd &val_ca) {
    const DnnConfig &config = model.config();
    const int n = static_cast<int>(train_features.rows());
    if (n < 2) {
        throw AgelabError("dnn_fit: need at least 2 training subjects");
    }
    model.target_mean = train_ca.mean();
    model.target_sd = std::sqrt((train_ca.array() - model.target_mean).square().mean());
    if (model.target_sd <= 0.0) {
        throw AgelabError("dnn_fit: constant chronological-age target");
    }
    Eigen::VectorXd y_train = (train_ca.array() - model.target_mean) / model.target_sd;
    Eigen::VectorXd y_val = (val_ca.array() - model.target_mean) / model.target_sd;

    DnnFitResult result;
    nn::Adam optimizer(config.learning_rate);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    auto best = model.params().snapshot();
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        util::Rng rng(util::derive_seed(config.seed, 0xd223 + static_cast<std::uint64_t>(epoch)));
        util::shuffle(order, rng);
        double mse_sum = 0.0;
        int steps = 0;
        for (int start = 0; start < n; start += config.batch_size) {
            const int stop = std::min(n, start + config.batch_size);
            const int k = stop - start;
            Matrix xb(k, train_features.cols());
            Matrix yb(k, 1);
            for (int i = 0; i < k; ++i) {
                xb.row(i) = train_features.row(order[static_cast<std::size_t>(start + i)]);
                yb(i, 0) = y_train(order[static_cast<std::size_t>(start + i)]);
            }
            Tape tape;
            Var pred = model.forward(tape, xb);
            Var loss = mean(square(sub(pred, tape.constant(yb))));
            const double value = loss.scalar();
            if (!std::isfinite(value)) {
                throw AgelabError("dnn_fit: divergence at epoch " + std::to_string(epoch));
            }
            model.params().zero_grad();
            tape.backward(loss);
            optimizer.step(model.params());
            mse_sum += value;
            ++steps;
        }
        result.train_mse.push_back(steps > 0 ? mse_sum / steps : 0.0);

        Tape tape;
        Var val_pred = model.forward(tape, val_features);
        const double val_mse =
            (val_pred.value().col(0) - y_val).array().square().mean();
        result.val_mse.push_back(val_mse);
        if (val_mse < best_val) {
            best_val = val_mse;
            best = model.params().snapshot();
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    model.params().restore(best);
    return result;
}

std::vector<model::BaEstimate> dnn_estimate_all(const DnnModel &model,
                                                const cohort::CohortTable &cohort,
                                                std::span<const std::size_t> ids,
                                                const cohort::TrainStats &stats) {
    model::PreparedData data = model::prepare_inputs(cohort, ids, stats, nullptr);
    Eigen::VectorXd pred = model.predict(data.features);
    std::vector<model::BaEstimate> out;
    out.reserve(ids.size());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const auto &record = cohort.records[ids[static_cast<std::size_t>(i)]];
        model::BaEstimate est;
        est.id = record.id;
        est.ca = record.chronological_age;
        est.ba = pred(i);
        est.gap = est.ba - est.ca;
        out.push_back(std::move(est));
    }
    return out;
}

void dnn_save(const std::filesystem::path &path, const DnnModel &model,
              const cohort::TrainStats &stats, const std::string &feature_set,
              const std::string &schema_hash) {
    json params = json::object();
    for (const auto &[name, p] : model.params().all()) {
        params[name] = model::matrix_to_json(p.value);
    }
    json j{{"kind", "dnn"},
           {"schema_hash", schema_hash},
           {"feature_set", feature_set},
           {"stats", model::stats_to_json(stats)},
           {"target_mean", model.target_mean},
           {"target_sd", model.target_sd},
           {"config",
            json{{"hidden_layers", model.config().hidden_layers},
                 {"hidden_width", model.config().hidden_width},
                 {"batch_size", model.config().batch_size},
                 {"learning_rate", model.config().learning_rate},
                 {"max_epochs", model.config().max_epochs},
                 {"patience", model.config().patience},
                 {"seed", model.config().seed}}},
           {"params", std::move(params)}};
    model::write_json_file(path, j);
}

LoadedDnn dnn_load(const std::filesystem::path &path) {
    json j = model::read_json_file(path);
    if (j.at("kind").get<std::string>() != "dnn") {
        throw AgelabError("not a dnn checkpoint: " + path.string());
    }
    LoadedDnn loaded;
    loaded.schema_hash = j.at("schema_hash").get<std::string>();
    loaded.feature_set = j.value("feature_set", "");
    loaded.stats = model::stats_from_json(j.at("stats"));
    const json &c = j.at("config");
    DnnConfig config;
    config.hidden_layers = c.at("hidden_layers").get<int>();
    config.hidden_width = c.at("hidden_width").get<int>();
    config.batch_size = c.at("batch_size").get<int>();
    config.learning_rate = c.at("learning_rate").get<double>();
    config.max_epochs = c.at("max_epochs").get<int>();
    config.patience = c.at("patience").get<int>();
    config.seed = c.at("seed").get<std::uint64_t>();
    loaded.model = std::make_unique<DnnModel>(static_cast<int>(loaded.stats.size()), config);
    loaded.model->target_mean = j.at("target_mean").get<double>();
    loaded.model->target_sd = j.at("target_sd").get<double>();
    std::map<std::string, Matrix> snap;
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
        snap[it.key()] = model::matrix_from_json(it.value());
    }
    loaded.model->params().restore(snap);
    return loaded;
}

} // namespace agelab::baselines
