#include "agelab/model/corrected.hpp"

#include "agelab/common/error.hpp"

#include <array>

namespace agelab::model {

using namespace agelab::cohort;

std::string CorrectionTable::key(Disease disease, const std::string &feature) {
    return std::string(to_string(disease)) + "/" + feature;
}

namespace {

bool is_normal_for(const MorbidityLabel &label, Disease d) {
    switch (d) {
    case Disease::dm:
    case Disease::hbp:
    case Disease::dlp:
        return label.tri(d) == TriState::normal;
    default:
        return label.binary(d) == BinaryState::healthy;
    }
}

bool has_illness_of(const MorbidityLabel &label, Disease d) {
    switch (d) {
    case Disease::dm:
    case Disease::hbp:
    case Disease::dlp:
        return label.tri(d) == TriState::illness;
    default:
        return label.binary(d) == BinaryState::with_disease;
    }
}

} // namespace

CorrectionTable CorrectionTable::build(const CohortTable &cohort,
                                       std::span<const std::size_t> train_ids) {
    CorrectionTable table;
    for (Disease d : all_diseases()) {
        for (std::size_t j = 0; j < cohort.schema.size(); ++j) {
            const FeatureSpec &spec = cohort.schema.at(j);
            if (!spec.tagged_with(d)) {
                continue;
            }
            std::array<double, 2> sums{0.0, 0.0};
            std::array<std::size_t, 2> counts{0, 0};
            double pooled_sum = 0.0;
            std::size_t pooled_count = 0;
            for (std::size_t id : train_ids) {
                const auto &label = cohort.labels[id];
                auto v = cohort.records[id].biomarkers[j];
                if (!v) {
                    continue;
                }
                pooled_sum += *v;
                ++pooled_count;
                if (!is_normal_for(label, d)) {
                    continue;
                }
                const int s = static_cast<int>(cohort.records[id].sex);
                sums[static_cast<std::size_t>(s)] += *v;
                ++counts[static_cast<std::size_t>(s)];
            }
            const double pooled = pooled_count > 0 ? pooled_sum / pooled_count : 0.0;
            std::array<double, 2> means;
            for (int s = 0; s < 2; ++s) {
                means[static_cast<std::size_t>(s)] =
                    counts[static_cast<std::size_t>(s)] > 0
                        ? sums[static_cast<std::size_t>(s)] / counts[static_cast<std::size_t>(s)]
                        : pooled;
            }
            table.values_[key(d, spec.name)] = means;
        }
    }
    return table;
}

double CorrectionTable::substitution(Disease disease, const std::string &feature,
                                     Sex sex) const {
    auto it = values_.find(key(disease, feature));
    if (it == values_.end()) {
        throw AgelabError("CorrectionTable: no substitution for " + key(disease, feature));
    }
    return it->second[static_cast<std::size_t>(static_cast<int>(sex))];
}

bool CorrectionTable::has(Disease disease, const std::string &feature) const {
    return values_.count(key(disease, feature)) > 0;
}

void CorrectionTable::set(Disease disease, const std::string &feature, double male,
                          double female) {
    values_[key(disease, feature)] = {male, female};
}

SubjectRecord make_corrected_pair(const SubjectRecord &record, const MorbidityLabel &label,
                                  const Schema &schema, const CorrectionTable &table) {
    SubjectRecord corrected = record;
    for (Disease d : all_diseases()) {
        if (!has_illness_of(label, d)) {
            continue;
        }
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const FeatureSpec &spec = schema.at(j);
            if (spec.tagged_with(d) && table.has(d, spec.name)) {
                corrected.biomarkers[j] = table.substitution(d, spec.name, record.sex);
            }
        }
        switch (d) {
        case Disease::dm:
            corrected.dm_medication = false;
            break;
        case Disease::hbp:
            corrected.hbp_medication = false;
            break;
        case Disease::dlp:
            corrected.dlp_medication = false;
            break;
        case Disease::cancer:
            corrected.cancer_history = false;
            break;
        case Disease::cvd:
            corrected.cvd_history = false;
            break;
        case Disease::cva:
            corrected.cva_history = false;
            break;
        case Disease::ms:
            break;
        }
    }
    return corrected;
}

bool has_biomarker_correction(const MorbidityLabel &label, const Schema &schema) {
    for (Disease d : all_diseases()) {
        if (!has_illness_of(label, d)) {
            continue;
        }
        for (const auto &spec : schema.features()) {
            if (spec.tagged_with(d)) {
                return true;
            }
        }
    }
    return false;
}

} // namespace agelab::model
