#include "agelab/model/network.hpp"

#include "agelab/common/error.hpp"

#include <cmath>

namespace agelab::model {

using nn::Matrix;
using nn::Tape;
using nn::Var;

GapModel::GapModel(int n_features, const TrainConfig &config)
    : n_features_(n_features), config_(config) {
    if (n_features <= 0) {
        throw ConfigError("GapModel: feature count must be positive");
    }
    util::Rng rng(util::derive_seed(config.seed, 0xa6e1u));
    const Eigen::Index d = config.embed_width;

    value_weight_ = &store_.create("embed.value.W", 1, d);
    value_bias_ = &store_.create("embed.value.b", 1, d);
    token_table_ = &store_.create("embed.token", 2, d);
    mask_table_ = &store_.create("embed.mask", 2, d);
    pos_table_ = &store_.create("embed.pos", tokens(), d);
    nn::init_normal(*value_weight_, rng, 0.5);
    nn::init_zeros(*value_bias_);
    nn::init_normal(*token_table_, rng, 0.5);
    nn::init_normal(*mask_table_, rng, 0.1);
    nn::init_normal(*pos_table_, rng, 0.1);

    encoder_ = nn::TransformerStack(store_, "encoder", config.depth, d, config.heads,
                                    config.ff_width, rng);
    decoder_ = nn::TransformerStack(store_, "decoder", config.depth, d, config.heads,
                                    config.ff_width, rng);
    ca_head1_ = nn::Linear(store_, "ca_head.fc1", d, config.head_hidden, rng);
    ca_head2_ = nn::Linear(store_, "ca_head.fc2", config.head_hidden, 1, rng);
    gap_mean1_ = nn::Linear(store_, "gap_mean.fc1", d, config.head_hidden, rng);
    gap_mean2_ = nn::Linear(store_, "gap_mean.fc2", config.head_hidden, 1, rng);
    gap_logvar1_ = nn::Linear(store_, "gap_logvar.fc1", d, config.head_hidden, rng);
    gap_logvar2_ = nn::Linear(store_, "gap_logvar.fc2", config.head_hidden, 1, rng);
}

Var GapModel::embed(Tape &tape, const Matrix &features_std, const Eigen::MatrixXi &mask,
                    const std::vector<int> *position_ids) const {
    const Eigen::Index batch = features_std.rows();
    const int T = tokens();
    if (features_std.cols() != n_features_) {
        throw AgelabError("embed: feature width does not match the model");
    }
    if (mask.rows() != batch || mask.cols() != T) {
        throw AgelabError("embed: mask must be batch x (features + 2)");
    }
    if (!features_std.allFinite()) {
        throw AgelabError("embed: non-finite feature value; impute before embedding");
    }
    if (position_ids && position_ids->size() != static_cast<std::size_t>(T)) {
        throw AgelabError("embed: position_ids must have one entry per token");
    }

    // Flattened scalar values: token rows carry 0, feature rows the value.
    Matrix xcol = Matrix::Zero(batch * T, 1);
    // Selectors routing the shared value bias / per-token value embeddings.
    Matrix sel_tok0 = Matrix::Zero(batch * T, 1);
    Matrix sel_tok1 = Matrix::Zero(batch * T, 1);
    Matrix sel_feat = Matrix::Zero(batch * T, 1);
    std::vector<int> mask_ids(static_cast<std::size_t>(batch * T));
    std::vector<int> pos_ids(static_cast<std::size_t>(batch * T));
    for (Eigen::Index k = 0; k < batch; ++k) {
        const Eigen::Index base = k * T;
        sel_tok0(base, 0) = 1.0;
        sel_tok1(base + 1, 0) = 1.0;
        for (int j = 0; j < n_features_; ++j) {
            xcol(base + 2 + j, 0) = features_std(k, j);
            sel_feat(base + 2 + j, 0) = 1.0;
        }
        for (int p = 0; p < T; ++p) {
            mask_ids[static_cast<std::size_t>(base + p)] = mask(k, p) != 0 ? 1 : 0;
            pos_ids[static_cast<std::size_t>(base + p)] =
                position_ids ? (*position_ids)[static_cast<std::size_t>(p)] : p;
        }
    }

    Var values = matmul(tape.constant(std::move(xcol)), tape.leaf(*value_weight_));
    Var feat_bias = matmul(tape.constant(std::move(sel_feat)), tape.leaf(*value_bias_));
    Var token_rows = tape.leaf(*token_table_);
    Var tok0 = matmul(tape.constant(std::move(sel_tok0)), gather_rows(token_rows, {0}));
    Var tok1 = matmul(tape.constant(std::move(sel_tok1)), gather_rows(token_rows, {1}));
    Var mask_part = gather_rows(tape.leaf(*mask_table_), std::move(mask_ids));
    Var pos_part = gather_rows(tape.leaf(*pos_table_), std::move(pos_ids));

    return add(add(add(add(values, feat_bias), add(tok0, tok1)), mask_part), pos_part);
}

Var GapModel::encode(Tape &tape, Var embedded) const {
    return encoder_(tape, embedded, tokens());
}

Var GapModel::decode(Tape &tape, Var latent) const { return decoder_(tape, latent, tokens()); }

namespace {

std::vector<int> token_rows(int batch, int tokens, int offset) {
    std::vector<int> idx(static_cast<std::size_t>(batch));
    for (int k = 0; k < batch; ++k) {
        idx[static_cast<std::size_t>(k)] = k * tokens + offset;
    }
    return idx;
}

} // namespace

Var GapModel::ca_latent(Tape &tape, Var latent, int batch) const {
    (void)tape;
    return gather_rows(latent, token_rows(batch, tokens(), 0));
}

Var GapModel::gap_latent(Tape &tape, Var latent, int batch) const {
    (void)tape;
    return gather_rows(latent, token_rows(batch, tokens(), 1));
}

Var GapModel::predict_ca(Tape &tape, Var z_ca) const {
    return ca_head2_(tape, gelu(ca_head1_(tape, z_ca)));
}

Var GapModel::gap_mean(Tape &tape, Var z_gap) const {
    return gap_mean2_(tape, gelu(gap_mean1_(tape, z_gap)));
}

Var GapModel::gap_logvar(Tape &tape, Var z_gap) const {
    return gap_logvar2_(tape, gelu(gap_logvar1_(tape, z_gap)));
}

GapModel::Forward GapModel::forward(Tape &tape, const Matrix &features_std,
                                    const Eigen::MatrixXi &mask) const {
    Forward f;
    const int batch = static_cast<int>(features_std.rows());
    f.x_embed = embed(tape, features_std, mask);
    f.latent = encode(tape, f.x_embed);
    f.z_ca = ca_latent(tape, f.latent, batch);
    f.z_gap = gap_latent(tape, f.latent, batch);
    f.ca_pred = predict_ca(tape, f.z_ca);
    f.gap_mean = gap_mean(tape, f.z_gap);
    f.gap_logvar = gap_logvar(tape, f.z_gap);
    return f;
}

Eigen::VectorXd GapModel::evaluate_gap(const Matrix &features_std,
                                       const Eigen::MatrixXi &mask) const {
    Tape tape;
    Forward f = forward(tape, features_std, mask);
    return f.gap_mean.value().col(0);
}

Eigen::VectorXd GapModel::evaluate_ca(const Matrix &features_std,
                                      const Eigen::MatrixXi &mask) const {
    Tape tape;
    Forward f = forward(tape, features_std, mask);
    return f.ca_pred.value().col(0);
}

Var sample_gap(Tape &tape, Var gap_mean, Var gap_logvar, const Eigen::VectorXd &eps) {
    if (gap_mean.rows() != eps.size()) {
        throw AgelabError("sample_gap: eps length must match the batch");
    }
    if (!gap_mean.value().allFinite() || !gap_logvar.value().allFinite()) {
        throw AgelabError("sample_gap: non-finite distribution parameters");
    }
    Matrix eps_m = eps;
    Var spread = exp_v(scale(gap_logvar, 0.5));
    return add(gap_mean, cmul(spread, tape.constant(std::move(eps_m))));
}

} // namespace agelab::model
