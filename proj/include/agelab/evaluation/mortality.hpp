#pragma once

#include "agelab/model/checkpoint.hpp"

#include <optional>
#include <string>
#include <vector>

namespace agelab::eval {

enum class RegressionMode { ca_only, ba_univariate, ca_plus_gap };

const char *to_string(RegressionMode mode);

struct MortalityRow {
    std::string population;
    std::string feature_set;
    std::string model;
    RegressionMode mode = RegressionMode::ba_univariate;
    /// Slope (days per year) of the coefficient of interest: CA, BA, or gap.
    double slope = 0.0;
    double r_squared = 0.0;
    double pcc = 0.0;
    double slope_p_value = 1.0;
    std::size_t n = 0;
};

/// Linear regression of days-to-death on CA / BA / (CA, gap) over the
/// deceased subjects. Reports the slope of the predictor of interest, the fit
/// R^2, PCC of that predictor vs days, and the slope's t-test p-value.
MortalityRow mortality_regression(const std::vector<model::BaEstimate> &estimates,
                                  const std::vector<std::optional<int>> &days_to_death,
                                  RegressionMode mode);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares fit of BA on CA.
LineFit fit_ba_ca_line(const std::vector<model::BaEstimate> &estimates);

} // namespace agelab::eval
