#include "agelab/evaluation/gap_tables.hpp"

#include "agelab/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace agelab::eval {

using namespace agelab::cohort;

bool state_out_of_distribution(PopulationKind training_population, int state_rank) {
    switch (training_population) {
    case PopulationKind::super_normal:
        return state_rank >= 1;
    case PopulationKind::normal:
        return state_rank >= 2;
    case PopulationKind::average:
    case PopulationKind::whole:
        return false;
    }
    return false;
}

void recompute_flags(GapRow &row) {
    row.ordering_ok = false;
    row.bold_ok = false;
    if (!row.mean_healthy || !row.mean_unhealthy) {
        return;
    }
    if (row.mean_middle) {
        row.ordering_ok =
            *row.mean_healthy < *row.mean_middle && *row.mean_middle < *row.mean_unhealthy;
        row.bold_ok = *row.mean_healthy < 0.0 && std::abs(*row.mean_middle) < 1.0 &&
                      *row.mean_unhealthy > 0.0;
    } else {
        row.ordering_ok = *row.mean_healthy < *row.mean_unhealthy;
        row.bold_ok = *row.mean_healthy < 0.0 && *row.mean_unhealthy > 0.0;
    }
}

namespace {

/// 0 healthy / 1 middle / 2 unhealthy; -1 when the disease has no middle state.
int state_rank_of(const MorbidityLabel &label, const std::string &disease) {
    if (disease == "overall") {
        switch (label.overall) {
        case OverallState::healthy:
            return 0;
        case OverallState::average:
            return 1;
        case OverallState::unhealthy:
            return 2;
        }
    }
    for (Disease d : tristate_diseases()) {
        if (disease == to_string(d)) {
            switch (label.tri(d)) {
            case TriState::normal:
                return 0;
            case TriState::pre:
                return 1;
            case TriState::illness:
                return 2;
            }
        }
    }
    for (Disease d : {Disease::ms, Disease::cancer, Disease::cvd, Disease::cva}) {
        if (disease == to_string(d)) {
            return label.binary(d) == BinaryState::healthy ? 0 : 2;
        }
    }
    throw AgelabError("unknown disease for gap table: " + disease);
}

GapRow build_row(const std::vector<model::BaEstimate> &estimates,
                 const std::vector<MorbidityLabel> &labels, const std::string &disease,
                 PopulationKind training_population) {
    GapRow row;
    row.disease = disease;
    double sums[3] = {0.0, 0.0, 0.0};
    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const int rank = state_rank_of(labels[i], disease);
        sums[rank] += estimates[i].gap;
        counts[rank] += 1;
    }
    row.n_healthy = counts[0];
    row.n_middle = counts[1];
    row.n_unhealthy = counts[2];
    if (counts[0] > 0) {
        row.mean_healthy = sums[0] / counts[0];
    }
    if (counts[1] > 0) {
        row.mean_middle = sums[1] / counts[1];
    }
    if (counts[2] > 0) {
        row.mean_unhealthy = sums[2] / counts[2];
    }
    row.ood_healthy = state_out_of_distribution(training_population, 0);
    row.ood_middle = state_out_of_distribution(training_population, 1);
    row.ood_unhealthy = state_out_of_distribution(training_population, 2);
    recompute_flags(row);
    return row;
}

} // namespace

GapTable gap_by_morbidity(const std::vector<model::BaEstimate> &estimates,
                          const std::vector<MorbidityLabel> &labels,
                          PopulationKind training_population) {
    if (estimates.size() != labels.size()) {
        throw AgelabError("gap_by_morbidity: estimate/label alignment mismatch");
    }
    GapTable table;
    table.rows.push_back(build_row(estimates, labels, "overall", training_population));
    for (Disease d : all_diseases()) {
        table.rows.push_back(build_row(estimates, labels, to_string(d), training_population));
    }
    return table;
}

GapStrata stratify_by_gap(const std::vector<model::BaEstimate> &estimates, double low,
                          double high) {
    GapStrata strata;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double gap = estimates[i].gap;
        if (gap < low) {
            strata.healthy.push_back(i);
        } else if (gap > high) {
            strata.unhealthy.push_back(i);
        } else {
            strata.average.push_back(i);
        }
    }
    return strata;
}

namespace {

double quantile(std::vector<double> sorted, double p) {
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

std::vector<BinnedCurve> age_binned_gap_curves(const std::vector<model::BaEstimate> &estimates,
                                               const std::vector<MorbidityLabel> &labels,
                                               const std::string &disease, double bin_width,
                                               double q_low, double q_high) {
    if (estimates.size() != labels.size()) {
        throw AgelabError("age_binned_gap_curves: estimate/label alignment mismatch");
    }
    const char *state_names[3] = {"healthy", "middle", "unhealthy"};
    // state -> bin label -> gaps
    std::map<int, std::map<double, std::vector<double>>> grouped;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const int rank = state_rank_of(labels[i], disease);
        const double bin = std::floor(estimates[i].ca / bin_width) * bin_width;
        grouped[rank][bin].push_back(estimates[i].gap);
    }
    std::vector<BinnedCurve> curves;
    for (const auto &[rank, bins] : grouped) {
        BinnedCurve curve;
        curve.state = state_names[rank];
        for (const auto &[bin, gaps] : bins) {
            std::vector<double> sorted = gaps;
            std::sort(sorted.begin(), sorted.end());
            BinnedCurvePoint point;
            point.bin_start = bin;
            point.n = sorted.size();
            double sum = 0.0;
            for (double g : sorted) {
                sum += g;
            }
            point.mean = sum / static_cast<double>(sorted.size());
            point.q_low = quantile(sorted, q_low);
            point.q_high = quantile(sorted, q_high);
            curve.points.push_back(point);
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

} // namespace agelab::eval
