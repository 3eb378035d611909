#include "agelab/baselines/kdm.hpp"

#include "agelab/common/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iostream>

namespace agelab::baselines {

using cohort::CohortTable;
using cohort::SubjectRecord;
using nlohmann::json;

KdmModel kdm_fit(const CohortTable &cohort, std::span<const std::size_t> train_ids,
                 const std::vector<std::string> &features, const KdmOptions &options) {
    KdmModel model;
    model.variant = options.variant;
    model.s_floor = options.s_floor;
    model.schema_hash = cohort.schema.hash();

    // Need at least two distinct chronological ages for the regressions.
    {
        bool distinct = false;
        for (std::size_t i = 1; i < train_ids.size(); ++i) {
            if (cohort.records[train_ids[i]].chronological_age !=
                cohort.records[train_ids[0]].chronological_age) {
                distinct = true;
                break;
            }
        }
        if (!distinct) {
            throw AgelabError("kdm_fit: need at least two distinct chronological ages");
        }
    }

    for (const auto &name : features) {
        const std::size_t col = cohort.schema.index_of(name);
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::size_t n = 0;
        for (std::size_t id : train_ids) {
            auto v = cohort.records[id].biomarkers[col];
            if (!v) {
                continue;
            }
            const double age = cohort.records[id].chronological_age;
            sx += age;
            sy += *v;
            sxx += age * age;
            sxy += age * *v;
            ++n;
        }
        if (n < 3) {
            std::cerr << "[kdm] feature with fewer than 3 observations dropped: " << name << '\n';
            continue;
        }
        const double denom = sxx - sx * sx / n;
        if (denom <= 0.0) {
            std::cerr << "[kdm] zero age variance for feature, dropped: " << name << '\n';
            continue;
        }
        KdmModel::FeatureLine line;
        line.name = name;
        line.slope = (sxy - sx * sy / n) / denom;
        line.intercept = (sy - line.slope * sx) / n;
        if (std::abs(line.slope) < options.min_abs_slope) {
            std::cerr << "[kdm] near-zero age slope, dropped: " << name << '\n';
            continue;
        }
        double ss_res = 0.0;
        for (std::size_t id : train_ids) {
            auto v = cohort.records[id].biomarkers[col];
            if (!v) {
                continue;
            }
            const double fit =
                line.slope * cohort.records[id].chronological_age + line.intercept;
            ss_res += (*v - fit) * (*v - fit);
        }
        line.residual_sd = std::max(std::sqrt(ss_res / std::max<std::size_t>(n - 2, 1)),
                                    options.s_floor);
        model.lines.push_back(std::move(line));
    }
    if (model.lines.empty()) {
        throw AgelabError("kdm_fit: no usable features");
    }

    // Training spread of BA - CA for the CA-term variant.
    {
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        KdmModel plain = model;
        plain.variant = KdmModel::Variant::without_ca;
        for (std::size_t id : train_ids) {
            try {
                const auto est = kdm_estimate(plain, cohort.records[id], cohort.schema);
                sum += est.gap;
                sum2 += est.gap * est.gap;
                ++n;
            } catch (const AgelabError &) {
            }
        }
        if (n > 1) {
            const double mean = sum / n;
            model.s_ba = std::max(std::sqrt(std::max(0.0, sum2 / n - mean * mean)), 1e-6);
        }
    }
    return model;
}

model::BaEstimate kdm_estimate(const KdmModel &model, const SubjectRecord &record,
                               const cohort::Schema &schema) {
    double numerator = 0.0;
    double denominator = 0.0;
    std::size_t used = 0;
    for (const auto &line : model.lines) {
        auto v = record.biomarkers[schema.index_of(line.name)];
        if (!v) {
            continue;
        }
        const double w = line.slope / (line.residual_sd * line.residual_sd);
        numerator += (*v - line.intercept) * w;
        denominator += line.slope * w;
        ++used;
    }
    if (used == 0) {
        throw AgelabError("kdm_estimate: record has no usable biomarkers");
    }
    if (model.variant == KdmModel::Variant::with_ca_term) {
        const double w_ca = 1.0 / (model.s_ba * model.s_ba);
        numerator += record.chronological_age * w_ca;
        denominator += w_ca;
    }
    model::BaEstimate est;
    est.id = record.id;
    est.ca = record.chronological_age;
    est.ba = numerator / denominator;
    est.gap = est.ba - est.ca;
    return est;
}

std::vector<model::BaEstimate> kdm_estimate_all(const KdmModel &model, const CohortTable &cohort,
                                                std::span<const std::size_t> ids) {
    std::vector<model::BaEstimate> out;
    out.reserve(ids.size());
    for (std::size_t id : ids) {
        out.push_back(kdm_estimate(model, cohort.records[id], cohort.schema));
    }
    return out;
}

void kdm_save(const std::filesystem::path &path, const KdmModel &model) {
    json lines = json::array();
    for (const auto &line : model.lines) {
        lines.push_back(json{{"name", line.name},
                             {"slope", line.slope},
                             {"intercept", line.intercept},
                             {"residual_sd", line.residual_sd}});
    }
    json j{{"kind", "kdm"},
           {"variant", model.variant == KdmModel::Variant::without_ca ? "without_ca"
                                                                      : "with_ca_term"},
           {"schema_hash", model.schema_hash},
           {"feature_set", model.feature_set},
           {"s_ba", model.s_ba},
           {"s_floor", model.s_floor},
           {"lines", std::move(lines)}};
    model::write_json_file(path, j);
}

KdmModel kdm_load(const std::filesystem::path &path) {
    json j = model::read_json_file(path);
    if (j.at("kind").get<std::string>() != "kdm") {
        throw AgelabError("not a kdm checkpoint: " + path.string());
    }
    KdmModel model;
    model.variant = j.at("variant").get<std::string>() == "with_ca_term"
                        ? KdmModel::Variant::with_ca_term
                        : KdmModel::Variant::without_ca;
    model.schema_hash = j.at("schema_hash").get<std::string>();
    model.feature_set = j.value("feature_set", "");
    model.s_ba = j.at("s_ba").get<double>();
    model.s_floor = j.at("s_floor").get<double>();
    for (const auto &l : j.at("lines")) {
        KdmModel::FeatureLine line;
        line.name = l.at("name").get<std::string>();
        line.slope = l.at("slope").get<double>();
        line.intercept = l.at("intercept").get<double>();
        line.residual_sd = l.at("residual_sd").get<double>();
        model.lines.push_back(std::move(line));
    }
    return model;
}

} // namespace agelab::baselines
