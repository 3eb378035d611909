#pragma once

#include <span>
#include <vector>

namespace agelab::analysis {

/// Pearson correlation coefficient. Throws UndefinedStatisticError for
/// constant input or length < 2.
double pearson(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based); ties share the mean of their rank positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Spearman rank-order correlation: Pearson on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Histogram plug-in mutual information estimate in nats, using equal-width
/// bins over each variable's observed range.
double mutual_information(std::span<const double> x, std::span<const double> y, int bins);

/// Entropy of the equal-width-binned variable, in nats (MI identity check).
double binned_entropy(std::span<const double> x, int bins);

} // namespace agelab::analysis
