#pragma once

#include <span>
#include <vector>

namespace agelab::eval {

struct WelchResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Two-sample unequal-variance t test, two-sided p via Welch-Satterthwaite
/// degrees of freedom. Throws UndefinedStatisticError for degenerate input.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

struct SurvivalPoint {
    double time = 0.0;
    double survival = 1.0;
    int at_risk = 0;
    int deaths = 0;
};

struct SurvivalCurve {
    std::vector<SurvivalPoint> points; // one per distinct event time

    double survival_at(double time) const;
};

/// Product-limit estimator. times > 0; event=true marks a death, false a
/// censoring (which leaves the risk set without a survival drop).
SurvivalCurve kaplan_meier(std::span<const double> times, const std::vector<bool> &events);

struct LogrankResult {
    double chi_square = 0.0;
    double p_value = 1.0;
    double observed_a = 0.0;
    double expected_a = 0.0;
};

/// Two-group log-rank test (1 degree of freedom). Refuses inputs without any
/// event.
LogrankResult logrank_test(std::span<const double> times_a, const std::vector<bool> &events_a,
                           std::span<const double> times_b, const std::vector<bool> &events_b);

// Distribution helpers shared with the regression code.
double student_t_two_sided_p(double t, double df);
double chi_square_upper_p(double x, double df);

} // namespace agelab::eval
