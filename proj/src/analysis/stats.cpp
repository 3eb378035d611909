#include "agelab/analysis/stats.hpp"

#include "agelab/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agelab::analysis {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw AgelabError("pearson: length mismatch");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw UndefinedStatisticError("pearson: need at least 2 observations");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedStatisticError("pearson: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw AgelabError("spearman: length mismatch");
    }
    if (x.size() < 2) {
        throw UndefinedStatisticError("spearman: need at least 2 observations");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

namespace {

std::vector<int> bin_indices(std::span<const double> x, int bins) {
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    std::vector<int> idx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = span > 0.0 ? static_cast<int>((x[i] - lo) / span * bins) : 0;
        idx[i] = std::clamp(b, 0, bins - 1);
    }
    return idx;
}

} // namespace

double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    if (x.size() != y.size()) {
        throw AgelabError("mutual_information: length mismatch");
    }
    if (bins < 2) {
        throw AgelabError("mutual_information: need at least 2 bins");
    }
    if (x.size() < static_cast<std::size_t>(bins)) {
        throw AgelabError("mutual_information: need at least as many samples as bins");
    }
    const std::vector<int> bx = bin_indices(x, bins);
    const std::vector<int> by = bin_indices(y, bins);
    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    const double w = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[static_cast<std::size_t>(bx[i]) * bins + by[i]] += w;
        px[bx[i]] += w;
        py[by[i]] += w;
    }
    double mi = 0.0;
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            const double pab = joint[static_cast<std::size_t>(a) * bins + b];
            if (pab > 0.0) {
                mi += pab * std::log(pab / (px[a] * py[b]));
            }
        }
    }
    return std::max(mi, 0.0);
}

double binned_entropy(std::span<const double> x, int bins) {
    const std::vector<int> bx = bin_indices(x, bins);
    std::vector<double> px(bins, 0.0);
    const double w = 1.0 / static_cast<double>(x.size());
    for (int b : bx) {
        px[b] += w;
    }
    double h = 0.0;
    for (double p : px) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace agelab::analysis
