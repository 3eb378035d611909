#include "agelab/baselines/cac.hpp"

#include "agelab/common/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace agelab::baselines {

using cohort::CohortTable;
using cohort::SubjectRecord;
using nlohmann::json;

CacModel cac_fit(const CohortTable &cohort, std::span<const std::size_t> train_ids,
                 const std::vector<std::string> &features, const CacOptions &options) {
    if (train_ids.empty()) {
        throw AgelabError("cac_fit: empty training split");
    }
    CacModel model;
    model.features = features;
    model.k_neighbors = options.k_neighbors;
    model.epsilon = options.epsilon;
    model.schema_hash = cohort.schema.hash();

    std::vector<std::size_t> cols;
    for (const auto &name : features) {
        cols.push_back(cohort.schema.index_of(name));
    }
    const auto n_features = static_cast<Eigen::Index>(features.size());

    // Global z-scoring statistics over observed training values.
    model.feature_mean = Eigen::VectorXd::Zero(n_features);
    model.feature_sd = Eigen::VectorXd::Ones(n_features);
    for (Eigen::Index j = 0; j < n_features; ++j) {
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (std::size_t id : train_ids) {
            if (auto v = cohort.records[id].biomarkers[cols[static_cast<std::size_t>(j)]]) {
                sum += *v;
                sum2 += *v * *v;
                ++n;
            }
        }
        if (n > 1) {
            model.feature_mean(j) = sum / n;
            model.feature_sd(j) =
                std::max(std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1))), 1e-9);
        }
    }

    double age_lo = 1e300, age_hi = -1e300;
    for (std::size_t id : train_ids) {
        age_lo = std::min(age_lo, cohort.records[id].chronological_age);
        age_hi = std::max(age_hi, cohort.records[id].chronological_age);
    }
    const int n_bins = std::max(1, static_cast<int>(std::ceil((age_hi - age_lo) /
                                                              options.bin_width_years)));

    struct Accum {
        Eigen::VectorXd sum;
        Eigen::VectorXd count;
        double ca_sum = 0.0;
        std::size_t n = 0;
        double lo = 0.0, hi = 0.0;
    };
    std::vector<Accum> bins(static_cast<std::size_t>(n_bins));
    for (int b = 0; b < n_bins; ++b) {
        bins[static_cast<std::size_t>(b)].sum = Eigen::VectorXd::Zero(n_features);
        bins[static_cast<std::size_t>(b)].count = Eigen::VectorXd::Zero(n_features);
        bins[static_cast<std::size_t>(b)].lo = age_lo + b * options.bin_width_years;
        bins[static_cast<std::size_t>(b)].hi = age_lo + (b + 1) * options.bin_width_years;
    }
    for (std::size_t id : train_ids) {
        const auto &record = cohort.records[id];
        int b = static_cast<int>((record.chronological_age - age_lo) / options.bin_width_years);
        b = std::clamp(b, 0, n_bins - 1);
        Accum &acc = bins[static_cast<std::size_t>(b)];
        acc.ca_sum += record.chronological_age;
        ++acc.n;
        for (Eigen::Index j = 0; j < n_features; ++j) {
            if (auto v = record.biomarkers[cols[static_cast<std::size_t>(j)]]) {
                acc.sum(j) += (*v - model.feature_mean(j)) / model.feature_sd(j);
                acc.count(j) += 1.0;
            }
        }
    }

    // Empty bins are merged into their neighbor by extending the age range.
    double pending_lo = -1e300;
    for (const auto &acc : bins) {
        if (acc.n == 0) {
            if (pending_lo == -1e300) {
                pending_lo = acc.lo;
            }
            continue;
        }
        CacModel::Cluster cluster;
        cluster.age_lo = pending_lo == -1e300 ? acc.lo : pending_lo;
        pending_lo = -1e300;
        cluster.age_hi = acc.hi;
        cluster.mean_ca = acc.ca_sum / acc.n;
        cluster.count = acc.n;
        cluster.centroid = Eigen::VectorXd::Zero(n_features);
        for (Eigen::Index j = 0; j < n_features; ++j) {
            if (acc.count(j) > 0) {
                cluster.centroid(j) = acc.sum(j) / acc.count(j);
            }
        }
        if (!model.clusters.empty() && cluster.age_lo > model.clusters.back().age_hi) {
            // trailing gap belongs to this cluster
            cluster.age_lo = model.clusters.back().age_hi;
        }
        model.clusters.push_back(std::move(cluster));
    }
    if (pending_lo != -1e300 && !model.clusters.empty()) {
        model.clusters.back().age_hi = age_lo + n_bins * options.bin_width_years;
    }
    if (model.clusters.size() < 2) {
        throw AgelabError("cac_fit: fewer than 2 non-empty age clusters");
    }
    return model;
}

model::BaEstimate cac_estimate(const CacModel &model, const SubjectRecord &record,
                               const cohort::Schema &schema) {
    const auto n_features = static_cast<Eigen::Index>(model.features.size());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_features);
    std::size_t observed = 0;
    for (Eigen::Index j = 0; j < n_features; ++j) {
        auto v = record.biomarkers[schema.index_of(model.features[static_cast<std::size_t>(j)])];
        if (v) {
            z(j) = (*v - model.feature_mean(j)) / model.feature_sd(j);
            ++observed;
        }
    }
    if (observed == 0) {
        throw AgelabError("cac_estimate: record has no usable biomarkers");
    }

    std::vector<std::pair<double, double>> by_distance; // (distance, mean_ca)
    by_distance.reserve(model.clusters.size());
    for (const auto &cluster : model.clusters) {
        by_distance.emplace_back((z - cluster.centroid).norm(), cluster.mean_ca);
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.k_neighbors),
                                                by_distance.size());
    std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k),
                      by_distance.end());
    double wsum = 0.0, wca = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / (by_distance[i].first + model.epsilon);
        wsum += w;
        wca += w * by_distance[i].second;
    }
    model::BaEstimate est;
    est.id = record.id;
    est.ca = record.chronological_age;
    est.ba = wca / wsum;
    est.gap = est.ba - est.ca;
    return est;
}

std::vector<model::BaEstimate> cac_estimate_all(const CacModel &model, const CohortTable &cohort,
                                                std::span<const std::size_t> ids) {
    std::vector<model::BaEstimate> out;
    out.reserve(ids.size());
    for (std::size_t id : ids) {
        out.push_back(cac_estimate(model, cohort.records[id], cohort.schema));
    }
    return out;
}

void cac_save(const std::filesystem::path &path, const CacModel &model) {
    json clusters = json::array();
    for (const auto &c : model.clusters) {
        std::vector<double> centroid(c.centroid.data(), c.centroid.data() + c.centroid.size());
        clusters.push_back(json{{"age_lo", c.age_lo},
                                {"age_hi", c.age_hi},
                                {"mean_ca", c.mean_ca},
                                {"count", c.count},
                                {"centroid", centroid}});
    }
    std::vector<double> mean(model.feature_mean.data(),
                             model.feature_mean.data() + model.feature_mean.size());
    std::vector<double> sd(model.feature_sd.data(),
                           model.feature_sd.data() + model.feature_sd.size());
    json j{{"kind", "cac"},
           {"schema_hash", model.schema_hash},
           {"feature_set", model.feature_set},
           {"features", model.features},
           {"feature_mean", mean},
           {"feature_sd", sd},
           {"k_neighbors", model.k_neighbors},
           {"epsilon", model.epsilon},
           {"clusters", std::move(clusters)}};
    model::write_json_file(path, j);
}

CacModel cac_load(const std::filesystem::path &path) {
    json j = model::read_json_file(path);
    if (j.at("kind").get<std::string>() != "cac") {
        throw AgelabError("not a cac checkpoint: " + path.string());
    }
    CacModel model;
    model.schema_hash = j.at("schema_hash").get<std::string>();
    model.feature_set = j.value("feature_set", "");
    model.features = j.at("features").get<std::vector<std::string>>();
    auto mean = j.at("feature_mean").get<std::vector<double>>();
    auto sd = j.at("feature_sd").get<std::vector<double>>();
    model.feature_mean = Eigen::Map<Eigen::VectorXd>(mean.data(),
                                                     static_cast<Eigen::Index>(mean.size()));
    model.feature_sd = Eigen::Map<Eigen::VectorXd>(sd.data(),
                                                   static_cast<Eigen::Index>(sd.size()));
    model.k_neighbors = j.at("k_neighbors").get<int>();
    model.epsilon = j.at("epsilon").get<double>();
    for (const auto &c : j.at("clusters")) {
        CacModel::Cluster cluster;
        cluster.age_lo = c.at("age_lo").get<double>();
        cluster.age_hi = c.at("age_hi").get<double>();
        cluster.mean_ca = c.at("mean_ca").get<double>();
        cluster.count = c.at("count").get<std::size_t>();
        auto centroid = c.at("centroid").get<std::vector<double>>();
        cluster.centroid = Eigen::Map<Eigen::VectorXd>(
            centroid.data(), static_cast<Eigen::Index>(centroid.size()));
        model.clusters.push_back(std::move(cluster));
    }
    return model;
}

} // namespace agelab::baselines
