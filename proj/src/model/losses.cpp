#include "agelab/model/losses.hpp"

#include "agelab/common/error.hpp"
#include "agelab/common/rng.hpp"

#include <cmath>
#include <iostream>

namespace agelab::model {

using nn::Matrix;
using nn::Tape;
using nn::Var;

const char *to_string(ContrastMode m) {
    return m == ContrastMode::difference ? "difference" : "sum";
}

ContrastMode contrast_mode_from_string(const std::string &s) {
    if (s == "difference") {
        return ContrastMode::difference;
    }
    if (s == "sum") {
        return ContrastMode::sum;
    }
    throw ConfigError("unknown contrast mode: " + s);
}

Var loss_reconstruction(Var x_embed, Var x_hat) {
    if (x_embed.rows() != x_hat.rows() || x_embed.cols() != x_hat.cols()) {
        throw AgelabError("loss_reconstruction: shape mismatch");
    }
    return mean(square(sub(x_hat, x_embed)));
}

Var loss_ca(Tape &tape, Var ca_pred, const Eigen::VectorXd &y, double lambda_r2,
            bool penalize_low_r2) {
    if (ca_pred.rows() != y.size() || ca_pred.cols() != 1) {
        throw AgelabError("loss_ca: prediction/target shape mismatch");
    }
    if (y.size() < 2) {
        throw AgelabError("loss_ca: need at least 2 targets");
    }
    Matrix ym = y;
    Var target = tape.constant(std::move(ym));
    Var sq = square(sub(ca_pred, target));
    Var mse = mean(sq);

    const double sst = (y.array() - y.mean()).square().sum();
    if (sst == 0.0) {
        std::cerr << "[loss_ca] constant target; dropping the R-squared term\n";
        return mse;
    }
    Var sse = sum(sq);
    // 1 - SSE/SST, added with weight lambda_r2; the penalizing variant negates it.
    Var r2 = add_scalar(scale(sse, -1.0 / sst), 1.0);
    Var term = scale(r2, penalize_low_r2 ? -lambda_r2 : lambda_r2);
    return add(mse, term);
}

Var loss_mmd(Var g, const Eigen::VectorXd &reference_draws) {
    if (g.value().size() < 2) {
        throw AgelabError("loss_mmd: need at least 2 samples");
    }
    Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(g.value().data(), g.value().size());
    const double bandwidth_sq = nn::median_bandwidth_sq(gv, reference_draws);
    return nn::gaussian_mmd2(g, reference_draws, bandwidth_sq);
}

Var loss_consistency(Tape &tape, const GapModel &model, Var latent, int batch,
                     std::uint64_t shuffle_seed) {
    const int T = model.tokens();
    if (latent.rows() != static_cast<Eigen::Index>(batch) * T) {
        throw AgelabError("loss_consistency: latent rows do not match batch");
    }
    std::vector<int> perm(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
        perm[static_cast<std::size_t>(i)] = i;
    }
    if (batch > 1) {
        util::Rng rng(shuffle_seed);
        util::shuffle(perm, rng);
    } else {
        std::cerr << "[loss_consistency] batch of one; identity permutation\n";
    }

    // Z': CA-token rows taken from the permuted subject, everything else kept.
    std::vector<int> rows(static_cast<std::size_t>(batch) * T);
    for (int k = 0; k < batch; ++k) {
        for (int p = 0; p < T; ++p) {
            rows[static_cast<std::size_t>(k * T + p)] =
                p == 0 ? perm[static_cast<std::size_t>(k)] * T : k * T + p;
        }
    }
    Var shuffled = gather_rows(latent, std::move(rows));
    Var reencoded = model.encode(tape, model.decode(tape, shuffled));

    Var g_orig = model.gap_mean(tape, model.gap_latent(tape, latent, batch));
    Var g_round = model.gap_mean(tape, model.gap_latent(tape, reencoded, batch));
    return mean(square(sub(g_orig, g_round)));
}

Var loss_contrastive(Var g_org, Var g_corr, double margin, ContrastMode mode) {
    if (g_org.rows() != g_corr.rows() || g_org.cols() != 1 || g_corr.cols() != 1) {
        throw AgelabError("loss_contrastive: pair shape mismatch");
    }
    Var inner = mode == ContrastMode::difference ? sub(g_org, g_corr) : add(g_org, g_corr);
    // margin - inner, hinged at zero after averaging.
    Var hinge_arg = add_scalar(scale(inner, -1.0), margin);
    return relu(mean(hinge_arg));
}

Var loss_mortality(Var g_deceased, const Eigen::VectorXd &days_to_death) {
    if (g_deceased.value().size() != days_to_death.size()) {
        throw AgelabError("loss_mortality: length mismatch");
    }
    if (days_to_death.size() < 2) {
        throw UndefinedStatisticError("loss_mortality: need at least 2 deceased subjects");
    }
    Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(g_deceased.value().data(),
                                                           g_deceased.value().size());
    if ((gv.array() - gv(0)).abs().maxCoeff() == 0.0) {
        throw UndefinedStatisticError("loss_mortality: constant gap values");
    }
    return add_scalar(nn::pearson_against(g_deceased, days_to_death), 1.0);
}

const char *to_string(LossPart part) {
    switch (part) {
    case LossPart::reconstruction:
        return "reconstruction";
    case LossPart::ca:
        return "ca";
    case LossPart::dist:
        return "dist";
    case LossPart::consistency:
        return "consistency";
    case LossPart::contrastive:
        return "contrastive";
    case LossPart::mortality:
        return "mortality";
    }
    return "?";
}

namespace {

std::array<double, 6> weight_array(const LossWeights &w) {
    return {w.reconstruction, w.ca, w.dist, w.consistency, w.contrastive, w.mortality};
}

} // namespace

Var total_loss(Tape &tape, const std::array<std::optional<Var>, 6> &parts,
               const LossWeights &weights) {
    const auto lambdas = weight_array(weights);
    Var total = tape.scalar_constant(0.0);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i]) {
            continue;
        }
        const double v = parts[i]->scalar();
        if (!std::isfinite(v)) {
            throw AgelabError(std::string("total_loss: non-finite ") +
                              to_string(static_cast<LossPart>(i)) + " part");
        }
        total = add(total, scale(*parts[i], lambdas[i]));
    }
    return total;
}

double total_loss_value(const std::array<std::optional<double>, 6> &parts,
                        const LossWeights &weights) {
    const auto lambdas = weight_array(weights);
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i]) {
            continue;
        }
        if (!std::isfinite(*parts[i])) {
            throw AgelabError(std::string("total_loss: non-finite ") +
                              to_string(static_cast<LossPart>(i)) + " part");
        }
        total += lambdas[i] * *parts[i];
    }
    return total;
}

} // namespace agelab::model
