#include "agelab/runner/experiment.hpp"

#include "agelab/cohort/groups.hpp"
#include "agelab/cohort/io.hpp"
#include "agelab/common/csv.hpp"
#include "agelab/common/error.hpp"
#include "agelab/evaluation/report.hpp"
#include "agelab/model/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <iostream>
#include <map>
#include <thread>

namespace agelab::runner {

using namespace agelab::cohort;
using analysis::FeatureSetName;
using nlohmann::json;

std::string CellKey::name() const {
    return sex + "_" + to_string(population) + "_" + analysis::to_string(feature_set) + "_" +
           model + "_s" + std::to_string(seed);
}

void RunManifest::save(const std::filesystem::path &path) const {
    json cells_json = json::array();
    for (const auto &cell : cells) {
        cells_json.push_back(json{{"sex", cell.key.sex},
                                  {"population", to_string(cell.key.population)},
                                  {"feature_set", analysis::to_string(cell.key.feature_set)},
                                  {"model", cell.key.model},
                                  {"seed", cell.key.seed},
                                  {"status", cell.status},
                                  {"artifacts", cell.artifacts},
                                  {"wall_seconds", cell.wall_seconds}});
    }
    model::write_json_file(path, json{{"config_hash", config_hash},
                                      {"version", version},
                                      {"cells", std::move(cells_json)}});
}

RunManifest RunManifest::load(const std::filesystem::path &path) {
    json j = model::read_json_file(path);
    RunManifest manifest;
    manifest.config_hash = j.at("config_hash").get<std::string>();
    manifest.version = j.value("version", manifest.version);
    for (const auto &c : j.at("cells")) {
        CellResult cell;
        cell.key.sex = c.at("sex").get<std::string>();
        cell.key.population = population_from_string(c.at("population").get<std::string>());
        cell.key.feature_set =
            analysis::feature_set_from_string(c.at("feature_set").get<std::string>());
        cell.key.model = c.at("model").get<std::string>();
        cell.key.seed = c.at("seed").get<std::uint64_t>();
        cell.status = c.at("status").get<std::string>();
        cell.artifacts = c.at("artifacts").get<std::vector<std::string>>();
        cell.wall_seconds = c.at("wall_seconds").get<double>();
        manifest.cells.push_back(std::move(cell));
    }
    return manifest;
}

bool RunManifest::cell_done(const CellKey &key) const {
    for (const auto &cell : cells) {
        if (cell.key.name() == key.name() && cell.status == "done") {
            return true;
        }
    }
    return false;
}

namespace {

std::vector<std::size_t> filter_by_sex(const CohortTable &cohort,
                                       const std::vector<std::size_t> &ids,
                                       const std::string &sex) {
    if (sex == "all") {
        return ids;
    }
    const Sex wanted = sex_from_string(sex);
    std::vector<std::size_t> out;
    for (std::size_t id : ids) {
        if (cohort.records[id].sex == wanted) {
            out.push_back(id);
        }
    }
    return out;
}

json estimates_to_json(const std::vector<model::BaEstimate> &estimates) {
    json rows = json::array();
    for (const auto &e : estimates) {
        rows.push_back(json{{"id", e.id}, {"ca", e.ca}, {"gap", e.gap}, {"ba", e.ba}});
    }
    return rows;
}

json gap_table_to_json(const eval::GapTable &table) {
    json rows = json::array();
    for (const auto &r : table.rows) {
        json row{{"disease", r.disease},
                 {"n_healthy", r.n_healthy},
                 {"n_middle", r.n_middle},
                 {"n_unhealthy", r.n_unhealthy},
                 {"ood_healthy", r.ood_healthy},
                 {"ood_middle", r.ood_middle},
                 {"ood_unhealthy", r.ood_unhealthy},
                 {"ordering_ok", r.ordering_ok},
                 {"bold_ok", r.bold_ok}};
        if (r.mean_healthy) {
            row["mean_healthy"] = *r.mean_healthy;
        }
        if (r.mean_middle) {
            row["mean_middle"] = *r.mean_middle;
        }
        if (r.mean_unhealthy) {
            row["mean_unhealthy"] = *r.mean_unhealthy;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json mortality_rows_to_json(const std::vector<eval::MortalityRow> &rows) {
    json out = json::array();
    for (const auto &r : rows) {
        out.push_back(json{{"mode", to_string(r.mode)},
                           {"slope", r.slope},
                           {"r_squared", r.r_squared},
                           {"pcc", r.pcc},
                           {"slope_p_value", r.slope_p_value},
                           {"n", r.n}});
    }
    return out;
}

struct CellData {
    std::vector<model::BaEstimate> test_estimates;
    std::vector<MorbidityLabel> test_labels;
    std::vector<std::optional<int>> test_days;
};

/// Fit the cell's model and evaluate it on the test split; writes the
/// checkpoint and per-cell metrics.json.
CellData run_cell(const ExperimentConfig &config, const CohortTable &cohort,
                  const std::map<PopulationKind, PopulationGroup> &groups, const CellKey &key,
                  int repeat_index, const std::filesystem::path &cell_dir) {
    std::filesystem::create_directories(cell_dir);
    const auto &group = groups.at(key.population);
    std::vector<std::size_t> members = filter_by_sex(cohort, group.member_ids, key.sex);
    PopulationGroup sex_group{key.population, members};

    SplitSpec spec;
    spec.seed = key.seed;
    spec.repeat_index = repeat_index;
    CohortSplit split = split_cohort(sex_group, spec);

    analysis::FeatureSet feature_set =
        analysis::build_feature_set(key.feature_set, cohort.schema, config.feature_options);
    std::vector<std::string> features = feature_set.members;
    if (key.model == "kdm") {
        std::vector<std::string> screened;
        for (const auto &name : features) {
            const auto &f = cohort.schema.at(name);
            if (!f.tumor_marker && !f.eyesight && !f.categorical) {
                screened.push_back(name);
            }
        }
        features = std::move(screened);
    }

    TrainStats stats = compute_train_stats(cohort, split.train, features);
    const std::string schema_hash = cohort.schema.hash();

    CellData data;
    std::vector<model::BaEstimate> estimates;

    if (key.model == "proposed") {
        model::TrainConfig train_config = config.train;
        train_config.seed = key.seed;
        model::GapModel gap_model(static_cast<int>(stats.size()), train_config);
        model::CorrectionTable corrections = model::CorrectionTable::build(cohort, split.train);
        model::PreparedData train_data =
            model::prepare_inputs(cohort, split.train, stats, &corrections);
        model::PreparedData val_data =
            model::prepare_inputs(cohort, split.val, stats, &corrections);
        model::TrainResult fit = model::train(gap_model, train_data, val_data, config.weights,
                                              train_config);
        model::save_checkpoint(cell_dir / "checkpoint.json", gap_model, stats, config.weights,
                               analysis::to_string(key.feature_set), schema_hash);
        // training history alongside the checkpoint
        {
            json hist = json::array();
            for (const auto &e : fit.history) {
                hist.push_back(json{{"epoch", e.epoch},
                                    {"train_parts", e.train_parts},
                                    {"train_total", e.train_total},
                                    {"val_parts", e.val_parts},
                                    {"val_total", e.val_total}});
            }
            model::write_json_file(cell_dir / "history.json",
                                   json{{"best_epoch", fit.best_epoch},
                                        {"stopped_epoch", fit.stopped_epoch},
                                        {"mortality_skips", fit.mortality_skips},
                                        {"epochs", std::move(hist)}});
        }
        estimates = model::estimate_ba(gap_model, cohort, split.test, stats);
    } else if (key.model == "kdm") {
        baselines::KdmOptions options = config.kdm;
        baselines::KdmModel kdm = baselines::kdm_fit(cohort, split.train, features, options);
        kdm.feature_set = analysis::to_string(key.feature_set);
        baselines::kdm_save(cell_dir / "checkpoint.json", kdm);
        estimates = baselines::kdm_estimate_all(kdm, cohort, split.test);
    } else if (key.model == "cac") {
        baselines::CacModel cac = baselines::cac_fit(cohort, split.train, features, config.cac);
        cac.feature_set = analysis::to_string(key.feature_set);
        baselines::cac_save(cell_dir / "checkpoint.json", cac);
        estimates = baselines::cac_estimate_all(cac, cohort, split.test);
    } else if (key.model == "dnn") {
        baselines::DnnConfig dnn_config = config.dnn;
        dnn_config.seed = key.seed;
        baselines::DnnModel dnn(static_cast<int>(stats.size()), dnn_config);
        model::PreparedData train_data = model::prepare_inputs(cohort, split.train, stats, nullptr);
        model::PreparedData val_data = model::prepare_inputs(cohort, split.val, stats, nullptr);
        baselines::dnn_fit(dnn, train_data.features, train_data.ca, val_data.features,
                           val_data.ca);
        baselines::dnn_save(cell_dir / "checkpoint.json", dnn, stats,
                            analysis::to_string(key.feature_set), schema_hash);
        estimates = baselines::dnn_estimate_all(dnn, cohort, split.test, stats);
    } else {
        throw ConfigError("unknown model: " + key.model);
    }

    data.test_estimates = estimates;
    for (std::size_t id : split.test) {
        data.test_labels.push_back(cohort.labels[id]);
        data.test_days.push_back(cohort.records[id].death
                                     ? std::optional<int>(cohort.records[id].death->days_to_death)
                                     : std::nullopt);
    }

    // Per-cell metrics.
    json metrics;
    eval::GapTable gap_table =
        eval::gap_by_morbidity(data.test_estimates, data.test_labels, key.population);
    for (auto &row : gap_table.rows) {
        row.population = to_string(key.population);
        row.model = key.model;
        row.feature_set = analysis::to_string(key.feature_set);
    }
    metrics["gap_table"] = gap_table_to_json(gap_table);

    std::vector<eval::MortalityRow> mortality_rows;
    for (auto mode : {eval::RegressionMode::ca_only, eval::RegressionMode::ba_univariate,
                      eval::RegressionMode::ca_plus_gap}) {
        try {
            eval::MortalityRow row =
                eval::mortality_regression(data.test_estimates, data.test_days, mode);
            row.population = to_string(key.population);
            row.feature_set = analysis::to_string(key.feature_set);
            row.model = key.model;
            mortality_rows.push_back(row);
        } catch (const AgelabError &e) {
            std::cerr << "[run] mortality regression skipped for " << key.name() << " ("
                      << to_string(mode) << "): " << e.what() << '\n';
        }
    }
    metrics["mortality"] = mortality_rows_to_json(mortality_rows);

    try {
        eval::LineFit fit = eval::fit_ba_ca_line(data.test_estimates);
        metrics["ba_ca_fit"] = json{{"slope", fit.slope}, {"intercept", fit.intercept}};
    } catch (const AgelabError &) {
    }
    metrics["estimates"] = estimates_to_json(data.test_estimates);
    model::write_json_file(cell_dir / "metrics.json", metrics);
    return data;
}

struct CellTask {
    CellKey key;
    int repeat_index = 0;
};

} // namespace

RunManifest run_experiment(const ExperimentConfig &config) {
    config.validate();
    const std::string hash = config_hash(config);
    std::filesystem::create_directories(config.out_dir);
    const auto manifest_path = config.out_dir / "manifest.json";

    RunManifest manifest;
    manifest.config_hash = hash;
    if (std::filesystem::exists(manifest_path)) {
        try {
            RunManifest previous = RunManifest::load(manifest_path);
            if (previous.config_hash == hash) {
                manifest = previous; // completed cells will be skipped
            }
        } catch (const std::exception &e) {
            std::cerr << "[run] ignoring unreadable manifest: " << e.what() << '\n';
        }
    }

    CohortTable cohort = generate_cohort(config.schema, config.generator, config.generator_seed);
    save_cohort(config.out_dir / "cohort", cohort);
    auto groups = assign_population_groups(cohort);

    const std::vector<std::string> &sexes = config.sexes;

    std::vector<CellTask> tasks;
    for (const auto &sex : sexes) {
        for (auto population : config.populations) {
            for (auto feature_set : config.feature_sets) {
                for (const auto &model_name : config.models) {
                    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
                        CellTask task;
                        task.key = CellKey{sex, population, feature_set, model_name,
                                           config.seeds[s]};
                        task.repeat_index = static_cast<int>(s);
                        tasks.push_back(task);
                    }
                }
            }
        }
    }

    std::vector<std::optional<CellResult>> results(tasks.size());
    auto worker = [&](std::size_t index) {
        const CellTask &task = tasks[index];
        if (manifest.cell_done(task.key)) {
            return; // resume: keep the previous result
        }
        CellResult result;
        result.key = task.key;
        const auto cell_dir = config.out_dir / "cells" / task.key.name();
        const auto start = std::chrono::steady_clock::now();
        try {
            run_cell(config, cohort, groups, task.key, task.repeat_index, cell_dir);
            result.status = "done";
            result.artifacts = {(cell_dir / "checkpoint.json").string(),
                                (cell_dir / "metrics.json").string()};
        } catch (const std::exception &e) {
            result.status = std::string("failed: ") + e.what();
        }
        result.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results[index] = result;
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            worker(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) {
                        return;
                    }
                    worker(i);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i]) {
            // replace any stale entry for the same cell
            std::erase_if(manifest.cells, [&](const CellResult &c) {
                return c.key.name() == results[i]->key.name();
            });
            manifest.cells.push_back(*results[i]);
        }
    }
    manifest.save(manifest_path);
    emit_report(config, manifest);
    return manifest;
}

namespace {

struct AggregateKey {
    std::string sex;
    PopulationKind population;
    FeatureSetName feature_set;
    std::string model;

    std::string name() const {
        return sex + "_" + std::string(to_string(population)) + "_" +
               analysis::to_string(feature_set) + "_" + model;
    }
    bool operator<(const AggregateKey &other) const { return name() < other.name(); }
};

std::optional<json> load_cell_metrics(const ExperimentConfig &config, const CellKey &key) {
    const auto path = config.out_dir / "cells" / key.name() / "metrics.json";
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    return model::read_json_file(path);
}

} // namespace

void emit_report(const ExperimentConfig &config, const RunManifest &manifest) {
    const auto tables_dir = config.out_dir / "tables";
    const auto curves_dir = config.out_dir / "curves";
    const auto plots_dir = config.out_dir / "plots";
    std::filesystem::create_directories(tables_dir);
    std::filesystem::create_directories(curves_dir);
    std::filesystem::create_directories(plots_dir);

    // Shared cohort lookup for labels and death days of pooled test subjects.
    std::map<std::string, MorbidityLabel> label_of;
    std::map<std::string, std::optional<int>> days_of;
    if (std::filesystem::exists(config.out_dir / "cohort" / "cohort.csv")) {
        CohortTable cohort = load_cohort(config.out_dir / "cohort");
        for (std::size_t i = 0; i < cohort.records.size(); ++i) {
            const auto &r = cohort.records[i];
            label_of[r.id] = cohort.labels[i];
            days_of[r.id] = r.death ? std::optional<int>(r.death->days_to_death) : std::nullopt;
        }
    }

    // group done cells by aggregate key
    std::map<AggregateKey, std::vector<CellKey>> cells_by_key;
    for (const auto &cell : manifest.cells) {
        if (cell.status != "done") {
            continue;
        }
        AggregateKey key{cell.key.sex, cell.key.population, cell.key.feature_set,
                         cell.key.model};
        cells_by_key[key].push_back(cell.key);
    }

    eval::GapTable averaged_gap;
    std::vector<eval::MortalityRow> averaged_mortality;
    util::CsvTable fit_table;
    fit_table.header = {"sex", "population", "feature_set", "model", "slope", "intercept"};

    for (const auto &[agg, seeds] : cells_by_key) {
        // --- averaged gap table rows ---
        std::map<std::string, std::vector<json>> per_disease;
        std::vector<double> fit_slopes, fit_intercepts;
        std::map<std::string, std::vector<json>> mortality_by_mode;
        // pooled estimates across seeds for survival analysis and scatter
        std::vector<model::BaEstimate> pooled;
        std::vector<std::optional<int>> pooled_days;

        for (const auto &key : seeds) {
            auto metrics = load_cell_metrics(config, key);
            if (!metrics) {
                continue;
            }
            for (const auto &row : metrics->at("gap_table")) {
                per_disease[row.at("disease").get<std::string>()].push_back(row);
            }
            if (metrics->contains("ba_ca_fit")) {
                fit_slopes.push_back(metrics->at("ba_ca_fit").at("slope").get<double>());
                fit_intercepts.push_back(metrics->at("ba_ca_fit").at("intercept").get<double>());
            }
            for (const auto &row : metrics->at("mortality")) {
                mortality_by_mode[row.at("mode").get<std::string>()].push_back(row);
            }
            for (const auto &e : metrics->at("estimates")) {
                model::BaEstimate est;
                est.id = e.at("id").get<std::string>();
                est.ca = e.at("ca").get<double>();
                est.gap = e.at("gap").get<double>();
                est.ba = e.at("ba").get<double>();
                pooled.push_back(est);
            }
        }
        if (per_disease.empty()) {
            continue;
        }

        for (const auto &[disease, rows] : per_disease) {
            eval::GapRow avg;
            avg.population = to_string(agg.population);
            avg.model = agg.model;
            avg.feature_set = analysis::to_string(agg.feature_set);
            avg.disease = disease;
            double sums[3] = {0, 0, 0};
            std::size_t counts[3] = {0, 0, 0};
            for (const auto &row : rows) {
                if (row.contains("mean_healthy")) {
                    sums[0] += row.at("mean_healthy").get<double>();
                    counts[0] += 1;
                }
                if (row.contains("mean_middle")) {
                    sums[1] += row.at("mean_middle").get<double>();
                    counts[1] += 1;
                }
                if (row.contains("mean_unhealthy")) {
                    sums[2] += row.at("mean_unhealthy").get<double>();
                    counts[2] += 1;
                }
                avg.n_healthy += row.at("n_healthy").get<std::size_t>();
                avg.n_middle += row.at("n_middle").get<std::size_t>();
                avg.n_unhealthy += row.at("n_unhealthy").get<std::size_t>();
                avg.ood_healthy = row.at("ood_healthy").get<bool>();
                avg.ood_middle = row.at("ood_middle").get<bool>();
                avg.ood_unhealthy = row.at("ood_unhealthy").get<bool>();
            }
            if (counts[0] > 0) {
                avg.mean_healthy = sums[0] / counts[0];
            }
            if (counts[1] > 0) {
                avg.mean_middle = sums[1] / counts[1];
            }
            if (counts[2] > 0) {
                avg.mean_unhealthy = sums[2] / counts[2];
            }
            eval::recompute_flags(avg);
            // carry the sex in the population column prefix-free: dedicated table per sex below
            avg.population = agg.sex + "/" + avg.population;
            averaged_gap.rows.push_back(std::move(avg));
        }

        for (const auto &[mode, rows] : mortality_by_mode) {
            eval::MortalityRow avg;
            avg.population = agg.sex + "/" + to_string(agg.population);
            avg.feature_set = analysis::to_string(agg.feature_set);
            avg.model = agg.model;
            avg.mode = mode == "ca_only" ? eval::RegressionMode::ca_only
                       : mode == "ba_univariate" ? eval::RegressionMode::ba_univariate
                                                 : eval::RegressionMode::ca_plus_gap;
            for (const auto &row : rows) {
                avg.slope += row.at("slope").get<double>();
                avg.r_squared += row.at("r_squared").get<double>();
                avg.pcc += row.at("pcc").get<double>();
                avg.slope_p_value += row.at("slope_p_value").get<double>();
                avg.n += row.at("n").get<std::size_t>();
            }
            const double k = static_cast<double>(rows.size());
            avg.slope /= k;
            avg.r_squared /= k;
            avg.pcc /= k;
            avg.slope_p_value /= k;
            averaged_mortality.push_back(std::move(avg));
        }

        if (!fit_slopes.empty()) {
            double slope = 0.0, intercept = 0.0;
            for (std::size_t i = 0; i < fit_slopes.size(); ++i) {
                slope += fit_slopes[i];
                intercept += fit_intercepts[i];
            }
            slope /= static_cast<double>(fit_slopes.size());
            intercept /= static_cast<double>(fit_slopes.size());
            fit_table.rows.push_back({agg.sex, to_string(agg.population),
                                      analysis::to_string(agg.feature_set), agg.model,
                                      util::format_double(slope),
                                      util::format_double(intercept)});
        }

        // --- pooled survival analysis and plots ---
        {
            eval::GapStrata strata = eval::stratify_by_gap(pooled, config.gap_threshold_low,
                                                           config.gap_threshold_high);
            auto curve_of = [&](const std::vector<std::size_t> &members)
                -> std::optional<eval::SurvivalCurve> {
                std::vector<double> times;
                std::vector<bool> events;
                for (std::size_t i : members) {
                    auto days = days_of[pooled[i].id];
                    if (days) {
                        times.push_back(static_cast<double>(*days));
                        events.push_back(true);
                    } else {
                        times.push_back(static_cast<double>(config.generator.hazard.horizon_days));
                        events.push_back(false);
                    }
                }
                if (times.empty()) {
                    return std::nullopt;
                }
                return eval::kaplan_meier(times, events);
            };
            auto healthy_curve = curve_of(strata.healthy);
            auto average_curve = curve_of(strata.average);
            auto unhealthy_curve = curve_of(strata.unhealthy);
            if (healthy_curve) {
                eval::save_survival_curve(curves_dir / (agg.name() + "_healthy.csv"),
                                          *healthy_curve);
            }
            if (average_curve) {
                eval::save_survival_curve(curves_dir / (agg.name() + "_average.csv"),
                                          *average_curve);
            }
            if (unhealthy_curve) {
                eval::save_survival_curve(curves_dir / (agg.name() + "_unhealthy.csv"),
                                          *unhealthy_curve);
            }

            std::string caption;
            if (!strata.healthy.empty() && !strata.unhealthy.empty()) {
                std::vector<double> t_a, t_b;
                std::vector<bool> e_a, e_b;
                for (std::size_t i : strata.healthy) {
                    auto days = days_of[pooled[i].id];
                    t_a.push_back(days ? *days : config.generator.hazard.horizon_days);
                    e_a.push_back(days.has_value());
                }
                for (std::size_t i : strata.unhealthy) {
                    auto days = days_of[pooled[i].id];
                    t_b.push_back(days ? *days : config.generator.hazard.horizon_days);
                    e_b.push_back(days.has_value());
                }
                try {
                    eval::LogrankResult lr = eval::logrank_test(t_a, e_a, t_b, e_b);
                    caption = "log-rank p=" + util::format_double(lr.p_value);
                } catch (const AgelabError &) {
                }
            }

            std::vector<eval::NamedCurve> named;
            if (healthy_curve) {
                named.push_back({"healthy", "#2a9d2a", *healthy_curve});
            }
            if (average_curve) {
                named.push_back({"average", "#e0a800", *average_curve});
            }
            if (unhealthy_curve) {
                named.push_back({"unhealthy", "#d62728", *unhealthy_curve});
            }
            if (!named.empty()) {
                eval::plot_survival(plots_dir / ("km_" + agg.name() + ".svg"), named,
                                    config.generator.hazard.horizon_days,
                                    "survival by gap stratum: " + agg.name(), caption);
            }

            if (pooled.size() >= 2) {
                try {
                    eval::LineFit fit = eval::fit_ba_ca_line(pooled);
                    eval::plot_ba_vs_ca(plots_dir / ("scatter_" + agg.name() + ".svg"), pooled,
                                        fit, "estimated vs chronological age: " + agg.name());
                } catch (const AgelabError &) {
                }
            }

            // Age-binned gap curves for the overall state and for DM.
            if (!pooled.empty() && !label_of.empty()) {
                std::vector<MorbidityLabel> pooled_labels;
                pooled_labels.reserve(pooled.size());
                bool all_found = true;
                for (const auto &e : pooled) {
                    auto it = label_of.find(e.id);
                    if (it == label_of.end()) {
                        all_found = false;
                        break;
                    }
                    pooled_labels.push_back(it->second);
                }
                if (all_found) {
                    for (const std::string disease : {"overall", "dm"}) {
                        auto curves =
                            eval::age_binned_gap_curves(pooled, pooled_labels, disease);
                        util::CsvTable csv;
                        csv.header = {"state", "bin_start", "mean", "q_low", "q_high", "n"};
                        for (const auto &c : curves) {
                            for (const auto &p : c.points) {
                                csv.rows.push_back({c.state, util::format_double(p.bin_start),
                                                    util::format_double(p.mean),
                                                    util::format_double(p.q_low),
                                                    util::format_double(p.q_high),
                                                    std::to_string(p.n)});
                            }
                        }
                        util::write_csv(curves_dir / ("binned_" + agg.name() + "_" + disease +
                                                      ".csv"),
                                        csv);
                        eval::plot_binned_gap_curves(
                            plots_dir / ("binned_" + agg.name() + "_" + disease + ".svg"),
                            curves, "gap by age and " + disease + " state: " + agg.name());
                    }
                }
            }
        }
    }

    eval::save_gap_table(tables_dir / "gap_by_morbidity.csv", averaged_gap);
    eval::save_mortality_rows(tables_dir / "mortality_regression.csv", averaged_mortality);
    util::write_csv(tables_dir / "ba_ca_fit.csv", fit_table);
}

} // namespace agelab::runner
