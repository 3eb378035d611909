#pragma once

#include "agelab/model/config.hpp"
#include "agelab/model/network.hpp"

#include <array>
#include <optional>

namespace agelab::model {

/// Mean squared difference over all entries of the embedded input and its
/// reconstruction (batch, tokens and embedding width all averaged).
nn::Var loss_reconstruction(nn::Var x_embed, nn::Var x_hat);

/// CA prediction loss: MSE plus the R-squared balance term. When y is
/// constant the second term is dropped (with a log line).
nn::Var loss_ca(nn::Tape &tape, nn::Var ca_pred, const Eigen::VectorXd &y, double lambda_r2,
                bool penalize_low_r2);

/// Unbiased Gaussian-kernel MMD^2 between the sampled gaps and fresh
/// standard-normal draws; bandwidth from the median heuristic.
nn::Var loss_mmd(nn::Var g, const Eigen::VectorXd &reference_draws);

/// Consistency of the gap mean under shuffling of the CA token latents across
/// the batch and one decode-encode round trip. Batch of one degenerates to
/// the identity permutation (loss 0).
nn::Var loss_consistency(nn::Tape &tape, const GapModel &model, nn::Var latent, int batch,
                         std::uint64_t shuffle_seed);

/// Margin loss on paired gap estimates from original and corrected inputs.
nn::Var loss_contrastive(nn::Var g_org, nn::Var g_corr, double margin, ContrastMode mode);

/// 1 + Pearson(g, days_to_death) over deceased batch members. Throws
/// UndefinedStatisticError for degenerate input; callers skip those batches.
nn::Var loss_mortality(nn::Var g_deceased, const Eigen::VectorXd &days_to_death);

enum class LossPart { reconstruction, ca, dist, consistency, contrastive, mortality };
const char *to_string(LossPart part);

/// Weighted sum of the six parts. Missing parts contribute zero; a non-finite
/// part aborts with a diagnostic naming it.
nn::Var total_loss(nn::Tape &tape, const std::array<std::optional<nn::Var>, 6> &parts,
                   const LossWeights &weights);

/// Scalar-side helper mirroring total_loss for reporting and tests.
double total_loss_value(const std::array<std::optional<double>, 6> &parts,
                        const LossWeights &weights);

} // namespace agelab::model
