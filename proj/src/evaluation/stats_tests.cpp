#include "agelab/evaluation/stats_tests.hpp"

#include "agelab/common/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace agelab::eval {

double student_t_two_sided_p(double t, double df) {
    boost::math::students_t_distribution<double> dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double chi_square_upper_p(double x, double df) {
    boost::math::chi_squared_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, std::max(x, 0.0)));
}

namespace {

struct MeanVar {
    double mean = 0.0;
    double var = 0.0; // sample variance
    std::size_t n = 0;
};

MeanVar mean_var(std::span<const double> x) {
    MeanVar mv;
    mv.n = x.size();
    for (double v : x) {
        mv.mean += v;
    }
    mv.mean /= static_cast<double>(mv.n);
    for (double v : x) {
        mv.var += (v - mv.mean) * (v - mv.mean);
    }
    mv.var /= static_cast<double>(mv.n - 1);
    return mv;
}

} // namespace

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw UndefinedStatisticError("welch_ttest: each group needs at least 2 values");
    }
    const MeanVar ma = mean_var(a);
    const MeanVar mb = mean_var(b);
    const double va = ma.var / static_cast<double>(ma.n);
    const double vb = mb.var / static_cast<double>(mb.n);
    if (va + vb <= 0.0) {
        throw UndefinedStatisticError("welch_ttest: both groups have zero variance");
    }
    WelchResult result;
    result.statistic = (ma.mean - mb.mean) / std::sqrt(va + vb);
    result.df = (va + vb) * (va + vb) /
                (va * va / static_cast<double>(ma.n - 1) +
                 vb * vb / static_cast<double>(mb.n - 1));
    result.p_value = result.statistic == 0.0
                         ? 1.0
                         : student_t_two_sided_p(result.statistic, result.df);
    return result;
}

SurvivalCurve kaplan_meier(std::span<const double> times, const std::vector<bool> &events) {
    if (times.empty() || times.size() != events.size()) {
        throw AgelabError("kaplan_meier: empty or mismatched input");
    }
    for (double t : times) {
        if (!(t > 0.0)) {
            throw AgelabError("kaplan_meier: times must be positive");
        }
    }
    // deaths and censorings per distinct time
    std::map<double, std::pair<int, int>> counts; // time -> (deaths, censored)
    for (std::size_t i = 0; i < times.size(); ++i) {
        auto &c = counts[times[i]];
        if (events[i]) {
            ++c.first;
        } else {
            ++c.second;
        }
    }
    SurvivalCurve curve;
    int at_risk = static_cast<int>(times.size());
    double survival = 1.0;
    for (const auto &[time, c] : counts) {
        const auto [deaths, censored] = c;
        if (deaths > 0) {
            survival *= 1.0 - static_cast<double>(deaths) / at_risk;
            curve.points.push_back({time, survival, at_risk, deaths});
        }
        at_risk -= deaths + censored;
    }
    return curve;
}

double SurvivalCurve::survival_at(double time) const {
    double s = 1.0;
    for (const auto &p : points) {
        if (p.time > time) {
            break;
        }
        s = p.survival;
    }
    return s;
}

LogrankResult logrank_test(std::span<const double> times_a, const std::vector<bool> &events_a,
                           std::span<const double> times_b, const std::vector<bool> &events_b) {
    if (times_a.size() != events_a.size() || times_b.size() != events_b.size()) {
        throw AgelabError("logrank_test: mismatched input");
    }
    std::size_t total_events = 0;
    for (bool e : events_a) {
        total_events += e ? 1 : 0;
    }
    for (bool e : events_b) {
        total_events += e ? 1 : 0;
    }
    if (total_events == 0) {
        throw UndefinedStatisticError("logrank_test: no events in either group");
    }

    // per distinct event time: deaths and censorings per group
    struct Counts {
        int d_a = 0, c_a = 0, d_b = 0, c_b = 0;
    };
    std::map<double, Counts> table;
    for (std::size_t i = 0; i < times_a.size(); ++i) {
        auto &c = table[times_a[i]];
        (events_a[i] ? c.d_a : c.c_a) += 1;
    }
    for (std::size_t i = 0; i < times_b.size(); ++i) {
        auto &c = table[times_b[i]];
        (events_b[i] ? c.d_b : c.c_b) += 1;
    }

    double n_a = static_cast<double>(times_a.size());
    double n_b = static_cast<double>(times_b.size());
    double observed_a = 0.0, expected_a = 0.0, variance = 0.0;
    for (const auto &[time, c] : table) {
        const double n = n_a + n_b;
        const double d = c.d_a + c.d_b;
        if (d > 0.0 && n > 1.0) {
            observed_a += c.d_a;
            expected_a += d * n_a / n;
            variance += d * (n_a / n) * (n_b / n) * (n - d) / (n - 1.0);
        }
        n_a -= c.d_a + c.c_a;
        n_b -= c.d_b + c.c_b;
    }
    LogrankResult result;
    result.observed_a = observed_a;
    result.expected_a = expected_a;
    if (variance > 0.0) {
        result.chi_square = (observed_a - expected_a) * (observed_a - expected_a) / variance;
        result.p_value = chi_square_upper_p(result.chi_square, 1.0);
    }
    return result;
}

} // namespace agelab::eval
