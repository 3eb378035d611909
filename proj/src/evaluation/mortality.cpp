#include "agelab/evaluation/mortality.hpp"

#include "agelab/analysis/stats.hpp"
#include "agelab/common/error.hpp"
#include "agelab/evaluation/stats_tests.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace agelab::eval {

const char *to_string(RegressionMode mode) {
    switch (mode) {
    case RegressionMode::ca_only:
        return "ca_only";
    case RegressionMode::ba_univariate:
        return "ba_univariate";
    case RegressionMode::ca_plus_gap:
        return "ca_plus_gap";
    }
    return "?";
}

MortalityRow mortality_regression(const std::vector<model::BaEstimate> &estimates,
                                  const std::vector<std::optional<int>> &days_to_death,
                                  RegressionMode mode) {
    if (estimates.size() != days_to_death.size()) {
        throw AgelabError("mortality_regression: estimate/death alignment mismatch");
    }
    std::vector<double> days;
    std::vector<const model::BaEstimate *> deceased;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (days_to_death[i]) {
            days.push_back(static_cast<double>(*days_to_death[i]));
            deceased.push_back(&estimates[i]);
        }
    }
    const std::size_t n = deceased.size();
    if (n < 3) {
        throw AgelabError("mortality_regression: need at least 3 deceased subjects");
    }

    const int predictors = mode == RegressionMode::ca_plus_gap ? 2 : 1;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), predictors + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::vector<double> interest(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        x(idx, 0) = 1.0;
        switch (mode) {
        case RegressionMode::ca_only:
            x(idx, 1) = deceased[i]->ca;
            interest[i] = deceased[i]->ca;
            break;
        case RegressionMode::ba_univariate:
            x(idx, 1) = deceased[i]->ba;
            interest[i] = deceased[i]->ba;
            break;
        case RegressionMode::ca_plus_gap:
            x(idx, 1) = deceased[i]->ca;
            x(idx, 2) = deceased[i]->gap;
            interest[i] = deceased[i]->gap;
            break;
        }
        y(idx) = days[i];
    }

    {
        // refuse degenerate design (e.g. gap identically zero in multivariate mode)
        for (int c = 1; c <= predictors; ++c) {
            const double sd = std::sqrt((x.col(c).array() - x.col(c).mean()).square().sum());
            if (sd <= 0.0) {
                throw UndefinedStatisticError(
                    "mortality_regression: zero-variance predictor column");
            }
        }
    }

    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::MatrixXd xtx_inv = xtx.inverse();
    const Eigen::VectorXd beta = xtx_inv * (x.transpose() * y);
    const Eigen::VectorXd residuals = y - x * beta;
    const double ss_res = residuals.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    const double dof = static_cast<double>(n) - static_cast<double>(predictors + 1);
    const double sigma2 = ss_res / dof;

    const int coef = predictors; // last column is the predictor of interest
    MortalityRow row;
    row.mode = mode;
    row.n = n;
    row.slope = beta(coef);
    row.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    row.pcc = analysis::pearson(interest, days);
    const double se = std::sqrt(sigma2 * xtx_inv(coef, coef));
    row.slope_p_value = se > 0.0 ? student_t_two_sided_p(beta(coef) / se, dof) : 1.0;
    return row;
}

LineFit fit_ba_ca_line(const std::vector<model::BaEstimate> &estimates) {
    if (estimates.size() < 2) {
        throw AgelabError("fit_ba_ca_line: need at least 2 estimates");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(estimates.size());
    for (const auto &e : estimates) {
        sx += e.ca;
        sy += e.ba;
        sxx += e.ca * e.ca;
        sxy += e.ca * e.ba;
    }
    const double denom = sxx - sx * sx / n;
    if (denom <= 0.0) {
        throw UndefinedStatisticError("fit_ba_ca_line: degenerate CA variance");
    }
    LineFit fit;
    fit.slope = (sxy - sx * sy / n) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

} // namespace agelab::eval
