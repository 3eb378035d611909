#pragma once

#include "agelab/model/config.hpp"
#include "agelab/nn/layers.hpp"

#include <optional>

namespace agelab::model {

/// Token-sequence gap estimation network: shared scalar value embedding plus
/// mask and position tables, a transformer encoder-decoder, a CA prediction
/// head on the first token and gap mean / log-variance heads on the second.
class GapModel {
  public:
    GapModel(int n_features, const TrainConfig &config);

    int feature_count() const { return n_features_; }
    int tokens() const { return n_features_ + 2; }
    const TrainConfig &config() const { return config_; }
    nn::ParameterStore &params() { return store_; }
    const nn::ParameterStore &params() const { return store_; }

    /// Embedded input (K*(N+2)) x d. Features must be standardized and finite;
    /// mask is K x (N+2) over tokens-then-features. Position ids default to
    /// 0..N+1; a custom per-token assignment can be supplied.
    nn::Var embed(nn::Tape &tape, const nn::Matrix &features_std,
                  const Eigen::MatrixXi &mask,
                  const std::vector<int> *position_ids = nullptr) const;

    nn::Var encode(nn::Tape &tape, nn::Var embedded) const;
    nn::Var decode(nn::Tape &tape, nn::Var latent) const;

    /// Rows of the latent matrix holding the CA / gap token for each subject.
    nn::Var ca_latent(nn::Tape &tape, nn::Var latent, int batch) const;
    nn::Var gap_latent(nn::Tape &tape, nn::Var latent, int batch) const;

    nn::Var predict_ca(nn::Tape &tape, nn::Var z_ca) const;
    nn::Var gap_mean(nn::Tape &tape, nn::Var z_gap) const;
    nn::Var gap_logvar(nn::Tape &tape, nn::Var z_gap) const;

    struct Forward {
        nn::Var x_embed;
        nn::Var latent;
        nn::Var z_ca;
        nn::Var z_gap;
        nn::Var ca_pred;    // K x 1
        nn::Var gap_mean;   // K x 1
        nn::Var gap_logvar; // K x 1
    };
    Forward forward(nn::Tape &tape, const nn::Matrix &features_std,
                    const Eigen::MatrixXi &mask) const;

    /// Evaluation-mode gap estimates (the mean head) for a standardized batch.
    Eigen::VectorXd evaluate_gap(const nn::Matrix &features_std,
                                 const Eigen::MatrixXi &mask) const;
    /// Evaluation-mode CA predictions.
    Eigen::VectorXd evaluate_ca(const nn::Matrix &features_std,
                                const Eigen::MatrixXi &mask) const;

  private:
    int n_features_;
    TrainConfig config_;
    nn::ParameterStore store_;
    nn::Parameter *value_weight_ = nullptr; // 1 x d scalar-value projector
    nn::Parameter *value_bias_ = nullptr;   // 1 x d
    nn::Parameter *token_table_ = nullptr;  // 2 x d learned token values
    nn::Parameter *mask_table_ = nullptr;   // 2 x d
    nn::Parameter *pos_table_ = nullptr;    // (N+2) x d
    nn::TransformerStack encoder_;
    nn::TransformerStack decoder_;
    nn::Linear ca_head1_, ca_head2_;
    nn::Linear gap_mean1_, gap_mean2_;
    nn::Linear gap_logvar1_, gap_logvar2_;
};

/// Reparameterized gap sample: mean + exp(logvar / 2) * eps.
nn::Var sample_gap(nn::Tape &tape, nn::Var gap_mean, nn::Var gap_logvar,
                   const Eigen::VectorXd &eps);

} // namespace agelab::model
