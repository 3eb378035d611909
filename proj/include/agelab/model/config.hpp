#pragma once

#include <cstdint>
#include <string>

namespace agelab::model {

/// How the contrastive term combines the paired gap estimates:
/// difference: margin - (g_org - g_corr); sum: margin - g_org - g_corr.
enum class ContrastMode { difference, sum };

const char *to_string(ContrastMode m);
ContrastMode contrast_mode_from_string(const std::string &s);

struct LossWeights {
    double reconstruction = 1.0;
    double ca = 0.05;
    double dist = 1.0;
    double consistency = 1.0;
    double contrastive = 1.0;
    double mortality = 1.0;
    /// Weight of the R-squared balance term inside the CA loss.
    double ca_r2 = 0.1;
    /// Margin (years) for the contrastive term.
    double margin = 1.0;
    /// When set, the R-squared term penalizes low R^2 instead of following the
    /// printed sign convention.
    bool penalize_low_r2 = false;
    ContrastMode contrast_mode = ContrastMode::difference;
};

struct TrainConfig {
    int batch_size = 2000;
    double learning_rate = 1e-3;
    int max_epochs = 1000;
    int patience = 100;
    int depth = 3; // encoder depth == decoder depth
    int heads = 4;
    int embed_width = 128;
    int ff_width = 1024;
    int head_hidden = 64;
    std::uint64_t seed = 0;
};

} // namespace agelab::model
