#include "agelab/model/train.hpp"

#include "agelab/common/error.hpp"
#include "agelab/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agelab::model {

using nn::Matrix;
using nn::Tape;
using nn::Var;

PreparedData prepare_inputs(const cohort::CohortTable &cohort,
                            std::span<const std::size_t> ids,
                            const cohort::TrainStats &stats,
                            const CorrectionTable *corrections) {
    PreparedData data;
    data.ids.assign(ids.begin(), ids.end());

    Matrix raw = cohort::extract_features(cohort, ids, stats.features);
    auto imputed = cohort::impute_and_mask(raw, stats);
    data.mask = std::move(imputed.mask);
    data.features = std::move(imputed.values);
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
        data.features.col(j) =
            (data.features.col(j).array() - stats.mean[static_cast<std::size_t>(j)]) /
            stats.sd[static_cast<std::size_t>(j)];
    }

    data.ca.resize(static_cast<Eigen::Index>(ids.size()));
    std::vector<double> days;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto &record = cohort.records[ids[i]];
        data.ca(static_cast<Eigen::Index>(i)) = record.chronological_age;
        if (record.death) {
            data.deceased_rows.push_back(static_cast<int>(i));
            days.push_back(static_cast<double>(record.death->days_to_death));
        }
    }
    data.days_to_death = Eigen::Map<Eigen::VectorXd>(days.data(),
                                                     static_cast<Eigen::Index>(days.size()));

    if (corrections != nullptr) {
        std::vector<Eigen::Index> paired;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto &label = cohort.labels[ids[i]];
            if (label.any_illness() && has_biomarker_correction(label, cohort.schema)) {
                paired.push_back(static_cast<Eigen::Index>(i));
            }
        }
        data.corrected_features.resize(static_cast<Eigen::Index>(paired.size()),
                                       data.features.cols());
        for (std::size_t p = 0; p < paired.size(); ++p) {
            const std::size_t id = ids[static_cast<std::size_t>(paired[p])];
            cohort::SubjectRecord corrected = make_corrected_pair(
                cohort.records[id], cohort.labels[id], cohort.schema, *corrections);
            for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
                const std::size_t col = cohort.schema.index_of(stats.features[static_cast<std::size_t>(j)]);
                auto v = corrected.biomarkers[col];
                const double value = v ? *v : stats.mean[static_cast<std::size_t>(j)];
                data.corrected_features(static_cast<Eigen::Index>(p), j) =
                    (value - stats.mean[static_cast<std::size_t>(j)]) /
                    stats.sd[static_cast<std::size_t>(j)];
            }
            data.paired_rows.push_back(static_cast<int>(paired[p]));
        }
    }
    return data;
}

namespace {

struct BatchView {
    Matrix features;
    Eigen::MatrixXi mask;
    Eigen::VectorXd ca;
    std::vector<int> deceased_rows; // rows within the batch
    Eigen::VectorXd days;
    Matrix corrected_features;
    std::vector<int> paired_rows; // rows within the batch
};

BatchView slice(const PreparedData &data, std::span<const int> rows) {
    BatchView view;
    const auto k = static_cast<Eigen::Index>(rows.size());
    view.features.resize(k, data.features.cols());
    view.mask.resize(k, data.mask.cols());
    view.ca.resize(k);
    std::vector<int> row_to_batch(static_cast<std::size_t>(data.features.rows()), -1);
    for (Eigen::Index i = 0; i < k; ++i) {
        const int src = rows[static_cast<std::size_t>(i)];
        view.features.row(i) = data.features.row(src);
        view.mask.row(i) = data.mask.row(src);
        view.ca(i) = data.ca(src);
        row_to_batch[static_cast<std::size_t>(src)] = static_cast<int>(i);
    }
    std::vector<double> days;
    for (std::size_t d = 0; d < data.deceased_rows.size(); ++d) {
        const int b = row_to_batch[static_cast<std::size_t>(data.deceased_rows[d])];
        if (b >= 0) {
            view.deceased_rows.push_back(b);
            days.push_back(data.days_to_death(static_cast<Eigen::Index>(d)));
        }
    }
    view.days = Eigen::Map<Eigen::VectorXd>(days.data(), static_cast<Eigen::Index>(days.size()));

    std::vector<Eigen::Index> pair_src;
    for (std::size_t p = 0; p < data.paired_rows.size(); ++p) {
        const int b = row_to_batch[static_cast<std::size_t>(data.paired_rows[p])];
        if (b >= 0) {
            view.paired_rows.push_back(b);
            pair_src.push_back(static_cast<Eigen::Index>(p));
        }
    }
    view.corrected_features.resize(static_cast<Eigen::Index>(pair_src.size()),
                                   data.features.cols());
    for (std::size_t p = 0; p < pair_src.size(); ++p) {
        view.corrected_features.row(static_cast<Eigen::Index>(p)) =
            data.corrected_features.row(pair_src[p]);
    }
    return view;
}

struct StepLosses {
    std::array<std::optional<double>, 6> parts;
    double total = 0.0;
    bool mortality_skipped = false;
};

/// Build the full six-part loss for one batch on the given tape. Returns the
/// weighted total var; per-part values via out.
Var build_losses(Tape &tape, const GapModel &model, const BatchView &batch,
                 const LossWeights &weights, util::Rng &rng, StepLosses &out) {
    const int k = static_cast<int>(batch.features.rows());
    GapModel::Forward f = model.forward(tape, batch.features, batch.mask);

    // Sampled gaps via the reparameterization path.
    Eigen::VectorXd eps(k);
    for (int i = 0; i < k; ++i) {
        eps(i) = rng.normal();
    }
    Var g = sample_gap(tape, f.gap_mean, f.gap_logvar, eps);

    std::array<std::optional<Var>, 6> parts;

    Var x_hat = model.decode(tape, f.latent);
    parts[0] = loss_reconstruction(f.x_embed, x_hat);
    parts[1] = loss_ca(tape, f.ca_pred, batch.ca, weights.ca_r2, weights.penalize_low_r2);

    if (k >= 2) {
        Eigen::VectorXd ref(k);
        for (int i = 0; i < k; ++i) {
            ref(i) = rng.normal();
        }
        parts[2] = loss_mmd(g, ref);
        parts[3] = loss_consistency(tape, model, f.latent, k, rng.next_u64());
    }

    if (!batch.paired_rows.empty()) {
        Var g_org = gather_rows(f.gap_mean, batch.paired_rows);
        GapModel::Forward corr =
            model.forward(tape, batch.corrected_features,
                          [&] {
                              Eigen::MatrixXi m(batch.corrected_features.rows(),
                                                batch.mask.cols());
                              for (Eigen::Index i = 0; i < m.rows(); ++i) {
                                  m.row(i) = batch.mask.row(
                                      batch.paired_rows[static_cast<std::size_t>(i)]);
                              }
                              return m;
                          }());
        parts[4] = loss_contrastive(g_org, corr.gap_mean, weights.margin,
                                    weights.contrast_mode);
    }

    if (batch.deceased_rows.size() >= 2) {
        try {
            Var g_dec = gather_rows(g, batch.deceased_rows);
            parts[5] = loss_mortality(g_dec, batch.days);
        } catch (const UndefinedStatisticError &) {
            out.mortality_skipped = true;
        }
    } else {
        out.mortality_skipped = true;
    }

    for (std::size_t i = 0; i < parts.size(); ++i) {
        out.parts[i] = parts[i] ? std::optional<double>(parts[i]->scalar()) : std::nullopt;
    }
    Var total = total_loss(tape, parts, weights);
    out.total = total.scalar();
    return total;
}

void accumulate_epoch(std::array<double, 6> &sums, std::array<int, 6> &counts,
                      const StepLosses &step) {
    for (std::size_t i = 0; i < 6; ++i) {
        if (step.parts[i]) {
            sums[i] += *step.parts[i];
            counts[i] += 1;
        }
    }
}

std::array<double, 6> finish_epoch(const std::array<double, 6> &sums,
                                   const std::array<int, 6> &counts) {
    std::array<double, 6> out{};
    for (std::size_t i = 0; i < 6; ++i) {
        out[i] = counts[i] > 0 ? sums[i] / counts[i] : 0.0;
    }
    return out;
}

} // namespace

TrainResult train(GapModel &model, const PreparedData &train_data, const PreparedData &val_data,
                  const LossWeights &weights, const TrainConfig &config) {
    if (train_data.features.rows() == 0 || val_data.features.rows() == 0) {
        throw AgelabError("train: empty split");
    }
    TrainResult result;
    nn::Adam optimizer(config.learning_rate);

    const int n = static_cast<int>(train_data.features.rows());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    auto best_snapshot = model.params().snapshot();
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        util::Rng epoch_rng(util::derive_seed(config.seed, 0xe90c0 + static_cast<std::uint64_t>(epoch)));
        util::shuffle(order, epoch_rng);

        std::array<double, 6> sums{};
        std::array<int, 6> counts{};
        double total_sum = 0.0;
        int steps = 0;
        for (int start = 0; start < n; start += config.batch_size) {
            const int stop = std::min(n, start + config.batch_size);
            std::span<const int> rows(order.data() + start, static_cast<std::size_t>(stop - start));
            if (rows.size() < 2) {
                continue; // a singleton remainder has no usable batch statistics
            }
            BatchView batch = slice(train_data, rows);
            Tape tape;
            StepLosses step;
            Var total;
            try {
                total = build_losses(tape, model, batch, weights, epoch_rng, step);
            } catch (const AgelabError &e) {
                throw AgelabError("train: aborted at epoch " + std::to_string(epoch) + ": " +
                                  e.what());
            }
            if (!std::isfinite(step.total)) {
                throw AgelabError("train: divergence (non-finite total) at epoch " +
                                  std::to_string(epoch));
            }
            model.params().zero_grad();
            tape.backward(total);
            optimizer.step(model.params());
            accumulate_epoch(sums, counts, step);
            if (step.mortality_skipped) {
                ++result.mortality_skips;
            }
            total_sum += step.total;
            ++steps;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_parts = finish_epoch(sums, counts);
        stats.train_total = steps > 0 ? total_sum / steps : 0.0;

        // Validation pass with epoch-seeded randomness, forward only.
        {
            util::Rng val_rng(util::derive_seed(config.seed, 0x7a11d + static_cast<std::uint64_t>(epoch)));
            std::array<double, 6> vsums{};
            std::array<int, 6> vcounts{};
            double vtotal = 0.0;
            int vsteps = 0;
            const int vn = static_cast<int>(val_data.features.rows());
            std::vector<int> vrows(static_cast<std::size_t>(vn));
            std::iota(vrows.begin(), vrows.end(), 0);
            for (int start = 0; start < vn; start += config.batch_size) {
                const int stop = std::min(vn, start + config.batch_size);
                std::span<const int> rows(vrows.data() + start,
                                          static_cast<std::size_t>(stop - start));
                if (rows.size() < 2) {
                    continue;
                }
                BatchView batch = slice(val_data, rows);
                Tape tape;
                StepLosses step;
                build_losses(tape, model, batch, weights, val_rng, step);
                accumulate_epoch(vsums, vcounts, step);
                vtotal += step.total;
                ++vsteps;
            }
            stats.val_parts = finish_epoch(vsums, vcounts);
            stats.val_total = vsteps > 0 ? vtotal / vsteps : 0.0;
        }
        result.history.push_back(stats);

        if (stats.val_total < best_val) {
            best_val = stats.val_total;
            best_epoch = epoch;
            best_snapshot = model.params().snapshot();
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= config.patience) {
                result.stopped_epoch = epoch;
                break;
            }
        }
    }

    model.params().restore(best_snapshot);
    result.best_epoch = best_epoch;
    result.best_val_total = best_val;
    if (result.stopped_epoch < 0) {
        result.stopped_epoch = static_cast<int>(result.history.size()) - 1;
    }
    return result;
}

} // namespace agelab::model
