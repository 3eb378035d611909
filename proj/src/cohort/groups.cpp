#include "agelab/cohort/groups.hpp"

#include "agelab/common/error.hpp"
#include "agelab/common/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace agelab::cohort {

const std::vector<std::string> &disease_related_features() {
    static const std::vector<std::string> names = {"HbA1c", "FBS", "SBP",  "DBP",
                                                   "LDLC",  "TG",  "HDLC", "WC"};
    return names;
}

namespace {

bool in_normal_group(const MorbidityLabel &label) {
    if (label.any_illness()) {
        return false;
    }
    // Only tri-state pre-stages are allowed beyond super normal.
    return label.ms == BinaryState::healthy && label.cancer == BinaryState::healthy &&
           label.cvd == BinaryState::healthy && label.cva == BinaryState::healthy;
}

struct MeanStd {
    double mean = 0.0;
    double sd = 0.0;
};

} // namespace

std::map<PopulationKind, PopulationGroup> assign_population_groups(const CohortTable &cohort) {
    if (cohort.labels.size() != cohort.records.size()) {
        throw AgelabError("assign_population_groups: labels not computed");
    }
    std::map<PopulationKind, PopulationGroup> groups;
    for (PopulationKind kind : {PopulationKind::super_normal, PopulationKind::normal,
                                PopulationKind::average, PopulationKind::whole}) {
        groups[kind].kind = kind;
    }

    // Per-sex mean and std of the disease-related features over the whole cohort.
    const auto &names = disease_related_features();
    std::vector<std::size_t> idx;
    for (const auto &n : names) {
        idx.push_back(cohort.schema.index_of(n));
    }
    std::array<std::vector<MeanStd>, 2> stats;
    for (int s = 0; s < 2; ++s) {
        stats[s].resize(idx.size());
    }
    for (std::size_t f = 0; f < idx.size(); ++f) {
        for (int s = 0; s < 2; ++s) {
            double sum = 0.0, sum2 = 0.0;
            std::size_t n = 0;
            for (const auto &r : cohort.records) {
                if (static_cast<int>(r.sex) != s) {
                    continue;
                }
                if (auto v = r.biomarkers[idx[f]]) {
                    sum += *v;
                    sum2 += *v * *v;
                    ++n;
                }
            }
            MeanStd ms;
            if (n > 1) {
                ms.mean = sum / n;
                ms.sd = std::sqrt(std::max(0.0, sum2 / n - ms.mean * ms.mean));
            }
            stats[s][f] = ms;
        }
    }

    for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        const auto &record = cohort.records[i];
        const auto &label = cohort.labels[i];
        groups[PopulationKind::whole].member_ids.push_back(i);
        if (label.overall == OverallState::healthy) {
            groups[PopulationKind::super_normal].member_ids.push_back(i);
        }
        if (in_normal_group(label)) {
            groups[PopulationKind::normal].member_ids.push_back(i);
        }
        bool within = true;
        const auto &st = stats[static_cast<int>(record.sex)];
        for (std::size_t f = 0; f < idx.size(); ++f) {
            auto v = record.biomarkers[idx[f]];
            if (!v) {
                continue; // unobserved features cannot violate the range
            }
            if (*v < st[f].mean - 2.0 * st[f].sd || *v > st[f].mean + 2.0 * st[f].sd) {
                within = false;
                break;
            }
        }
        if (within) {
            groups[PopulationKind::average].member_ids.push_back(i);
        }
    }
    return groups;
}

CohortSplit split_cohort(const PopulationGroup &group, const SplitSpec &spec) {
    const double ratio_sum = spec.train_ratio + spec.val_ratio + spec.test_ratio;
    if (std::abs(ratio_sum - 1.0) > 1e-9) {
        throw ConfigError("split_cohort: ratios must sum to 1");
    }
    if (group.member_ids.size() < 10) {
        throw ConfigError("split_cohort: group has fewer than 10 subjects");
    }
    std::vector<std::size_t> ids = group.member_ids;
    util::Rng rng(util::derive_seed(spec.seed, 0x5b1175u + static_cast<unsigned>(spec.repeat_index)));
    util::shuffle(ids, rng);

    const std::size_t n = ids.size();
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_ratio * n));
    const auto n_val = static_cast<std::size_t>(std::llround(spec.val_ratio * n));
    CohortSplit split;
    split.train.assign(ids.begin(), ids.begin() + n_train);
    split.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
    split.test.assign(ids.begin() + n_train + n_val, ids.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace agelab::cohort
