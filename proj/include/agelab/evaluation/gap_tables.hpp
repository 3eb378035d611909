#pragma once

#include "agelab/cohort/types.hpp"
#include "agelab/model/checkpoint.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agelab::eval {

/// One (disease-or-overall) row of the gap-by-morbidity table: mean gap per
/// state with boldness / ordering flags and out-of-distribution marks.
struct GapRow {
    std::string population;
    std::string model;
    std::string feature_set;
    std::string disease; // "overall" or a disease name
    // healthy / middle (pre or average) / unhealthy (illness) cells
    std::optional<double> mean_healthy;
    std::optional<double> mean_middle;
    std::optional<double> mean_unhealthy;
    std::size_t n_healthy = 0, n_middle = 0, n_unhealthy = 0;
    bool ood_healthy = false, ood_middle = false, ood_unhealthy = false;
    bool ordering_ok = false; // healthy < middle < unhealthy
    bool bold_ok = false;     // healthy < 0, |middle| < 1, unhealthy > 0
};

struct GapTable {
    std::vector<GapRow> rows;
};

/// Mean gap per morbidity state, overall and per disease, with flags.
/// training_population marks states that are impossible under the training
/// group (out-of-distribution cells).
GapTable gap_by_morbidity(const std::vector<model::BaEstimate> &estimates,
                          const std::vector<cohort::MorbidityLabel> &labels,
                          cohort::PopulationKind training_population);

/// Whether a morbidity state cannot occur inside the given training group.
bool state_out_of_distribution(cohort::PopulationKind training_population, int state_rank);

/// Recompute the ordering / bold flags of a row from its cell means.
void recompute_flags(GapRow &row);

struct GapStrata {
    std::vector<std::size_t> healthy;   // gap < low
    std::vector<std::size_t> average;   // low <= gap <= high
    std::vector<std::size_t> unhealthy; // gap > high
};

/// Partition estimate indices by gap thresholds; boundary values fall into
/// the average stratum.
GapStrata stratify_by_gap(const std::vector<model::BaEstimate> &estimates, double low = -1.0,
                          double high = 1.0);

struct BinnedCurvePoint {
    double bin_start = 0.0; // bin label (left edge)
    double mean = 0.0;
    double q_low = 0.0;
    double q_high = 0.0;
    std::size_t n = 0;
};

struct BinnedCurve {
    std::string state;
    std::vector<BinnedCurvePoint> points;
};

/// Mean gap and quantile band per CA bin and morbidity state for one disease
/// ("overall" aggregates the overall label). Empty bins are omitted.
std::vector<BinnedCurve> age_binned_gap_curves(const std::vector<model::BaEstimate> &estimates,
                                               const std::vector<cohort::MorbidityLabel> &labels,
                                               const std::string &disease,
                                               double bin_width = 5.0, double q_low = 0.25,
                                               double q_high = 0.75);

} // namespace agelab::eval
