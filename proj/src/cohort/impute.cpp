#include "agelab/cohort/impute.hpp"

#include "agelab/common/error.hpp"

#include <cmath>
#include <iostream>

namespace agelab::cohort {

TrainStats compute_train_stats(const CohortTable &cohort, std::span<const std::size_t> train_ids,
                               const std::vector<std::string> &feature_names) {
    TrainStats stats;
    for (const auto &name : feature_names) {
        const std::size_t col = cohort.schema.index_of(name);
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (std::size_t id : train_ids) {
            if (auto v = cohort.records[id].biomarkers[col]) {
                sum += *v;
                sum2 += *v * *v;
                ++n;
            }
        }
        if (n == 0) {
            stats.dropped.push_back(name);
            std::cerr << "[impute] feature never measured in training, dropped: " << name << '\n';
            continue;
        }
        const double mean = sum / n;
        const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
        stats.features.push_back(name);
        stats.mean.push_back(mean);
        stats.sd.push_back(std::max(std::sqrt(var), 1e-9));
        stats.observed_count.push_back(n);
        stats.missing_rate.push_back(1.0 - static_cast<double>(n) / train_ids.size());
    }
    return stats;
}

Eigen::MatrixXd extract_features(const CohortTable &cohort, std::span<const std::size_t> ids,
                                 const std::vector<std::string> &feature_names) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()),
                        static_cast<Eigen::Index>(feature_names.size()));
    std::vector<std::size_t> cols;
    cols.reserve(feature_names.size());
    for (const auto &name : feature_names) {
        cols.push_back(cohort.schema.index_of(name));
    }
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const auto &record = cohort.records[ids[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            auto v = record.biomarkers[cols[static_cast<std::size_t>(j)]];
            out(i, j) = v ? *v : std::nan("");
        }
    }
    return out;
}

ImputeResult impute_and_mask(const Eigen::MatrixXd &features_with_nan, const TrainStats &stats) {
    if (features_with_nan.cols() != static_cast<Eigen::Index>(stats.size())) {
        throw AgelabError("impute_and_mask: column count does not match train stats");
    }
    ImputeResult result;
    result.values = features_with_nan;
    result.mask = Eigen::MatrixXi::Zero(features_with_nan.rows(), features_with_nan.cols() + 2);
    for (Eigen::Index i = 0; i < result.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < result.values.cols(); ++j) {
            if (std::isnan(result.values(i, j))) {
                result.values(i, j) = stats.mean[static_cast<std::size_t>(j)];
                result.mask(i, j + 2) = 1;
            }
        }
    }
    return result;
}

} // namespace agelab::cohort
