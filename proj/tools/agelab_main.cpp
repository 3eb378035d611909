#include "agelab/analysis/correlation_report.hpp"
#include "agelab/cohort/groups.hpp"
#include "agelab/cohort/io.hpp"
#include "agelab/common/error.hpp"
#include "agelab/evaluation/report.hpp"
#include "agelab/runner/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace agelab;

runner::ExperimentConfig resolve_config(const std::string &config_path) {
    if (config_path.empty()) {
        return runner::default_experiment_config();
    }
    return runner::load_experiment_config(config_path);
}

void apply_overrides(runner::ExperimentConfig &config, const std::string &population,
                     const std::string &features, const std::string &model,
                     const std::string &sex, std::uint64_t seed, bool seed_set,
                     const std::string &out) {
    if (!population.empty()) {
        config.populations = {cohort::population_from_string(population)};
    }
    if (!features.empty()) {
        config.feature_sets = {analysis::feature_set_from_string(features)};
    }
    if (!model.empty()) {
        config.models = {model};
    }
    if (!sex.empty()) {
        config.sexes = {sex};
    }
    if (seed_set) {
        config.seeds = {seed};
    }
    if (!out.empty()) {
        config.out_dir = out;
    }
}

int cmd_generate(const std::string &config_path, const std::string &out, std::uint64_t seed,
                 bool seed_set) {
    runner::ExperimentConfig config = resolve_config(config_path);
    const std::uint64_t use_seed = seed_set ? seed : config.generator_seed;
    cohort::CohortTable cohort =
        cohort::generate_cohort(config.schema, config.generator, use_seed);
    const std::filesystem::path dir = out.empty() ? "cohort_out" : out;
    cohort::save_cohort(dir, cohort);
    std::cout << "cohort of " << cohort.size() << " subjects written to " << dir << '\n';
    return 0;
}

int cmd_analyze(const std::string &config_path, const std::string &cohort_dir,
                const std::string &population, const std::string &out) {
    cohort::CohortTable cohort;
    if (!cohort_dir.empty()) {
        cohort = cohort::load_cohort(cohort_dir);
    } else {
        runner::ExperimentConfig config = resolve_config(config_path);
        cohort = cohort::generate_cohort(config.schema, config.generator, config.generator_seed);
    }
    auto groups = cohort::assign_population_groups(cohort);
    const auto kind = population.empty() ? cohort::PopulationKind::whole
                                         : cohort::population_from_string(population);
    analysis::CorrelationReport report =
        analysis::select_age_correlated_features(cohort, groups.at(kind));
    const std::filesystem::path path = out.empty() ? "correlation_report.csv" : out;
    report.save(path);
    std::cout << "correlation report written to " << path << '\n';
    return 0;
}

int cmd_run(const std::string &config_path, const std::string &population,
            const std::string &features, const std::string &model, const std::string &sex,
            std::uint64_t seed, bool seed_set, const std::string &out) {
    runner::ExperimentConfig config = resolve_config(config_path);
    apply_overrides(config, population, features, model, sex, seed, seed_set, out);
    runner::RunManifest manifest = runner::run_experiment(config);
    std::size_t done = 0, failed = 0;
    for (const auto &cell : manifest.cells) {
        (cell.status == "done" ? done : failed) += 1;
    }
    std::cout << "run complete: " << done << " cells done, " << failed << " failed; manifest at "
              << (config.out_dir / "manifest.json") << '\n';
    return failed == 0 ? 0 : 1;
}

int cmd_train(const std::string &config_path, const std::string &population,
              const std::string &features, const std::string &model, const std::string &sex,
              std::uint64_t seed, bool seed_set, const std::string &out) {
    runner::ExperimentConfig config = resolve_config(config_path);
    apply_overrides(config, population.empty() ? "whole" : population,
                    features.empty() ? "base" : features, model.empty() ? "proposed" : model,
                    sex, seed, seed_set, out);
    if (!seed_set) {
        config.seeds = {config.seeds.front()};
    }
    runner::RunManifest manifest = runner::run_experiment(config);
    for (const auto &cell : manifest.cells) {
        std::cout << cell.key.name() << ": " << cell.status << " ("
                  << cell.wall_seconds << " s)\n";
    }
    return 0;
}

int cmd_report(const std::string &config_path, const std::string &out) {
    runner::ExperimentConfig config = resolve_config(config_path);
    if (!out.empty()) {
        config.out_dir = out;
    }
    runner::RunManifest manifest = runner::RunManifest::load(config.out_dir / "manifest.json");
    runner::emit_report(config, manifest);
    std::cout << "report tree refreshed under " << config.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"desk-scale laboratory for morbidity- and mortality-aware "
                 "biological age estimation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, population, features, model, sex, cohort_dir;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--out", out_dir, "output directory");
    };

    auto *generate = app.add_subcommand("generate", "synthesize a cohort");
    add_common(generate);
    auto *gen_seed = generate->add_option("--seed", seed, "generator seed");

    auto *analyze = app.add_subcommand("analyze", "correlation report vs chronological age");
    add_common(analyze);
    analyze->add_option("--cohort", cohort_dir, "previously generated cohort directory");
    analyze->add_option("--population", population, "population group");

    auto *train = app.add_subcommand("train", "train one model cell");
    add_common(train);
    train->add_option("--population", population, "population group");
    train->add_option("--features", features, "feature set");
    train->add_option("--model", model, "model {proposed,kdm,cac,dnn}");
    train->add_option("--sex", sex, "male or female");
    auto *train_seed = train->add_option("--seed", seed, "run seed");

    auto *evaluate = app.add_subcommand("evaluate", "fit and evaluate without the full grid");
    add_common(evaluate);
    evaluate->add_option("--population", population, "population group");
    evaluate->add_option("--features", features, "feature set");
    evaluate->add_option("--model", model, "model");
    evaluate->add_option("--sex", sex, "male or female");
    auto *eval_seed = evaluate->add_option("--seed", seed, "run seed");

    auto *run = app.add_subcommand("run", "full population x feature-set x model grid");
    add_common(run);
    run->add_option("--population", population, "restrict to one population");
    run->add_option("--features", features, "restrict to one feature set");
    run->add_option("--model", model, "restrict to one model");
    run->add_option("--sex", sex, "restrict to one sex");
    auto *run_seed = run->add_option("--seed", seed, "single seed instead of the config list");

    auto *report = app.add_subcommand("report", "re-emit tables and plots from a manifest");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            return cmd_generate(config_path, out_dir, seed, gen_seed->count() > 0);
        }
        if (analyze->parsed()) {
            return cmd_analyze(config_path, cohort_dir, population, out_dir);
        }
        if (train->parsed()) {
            return cmd_train(config_path, population, features, model, sex, seed,
                             train_seed->count() > 0, out_dir);
        }
        if (evaluate->parsed()) {
            return cmd_train(config_path, population, features, model, sex, seed,
                             eval_seed->count() > 0, out_dir);
        }
        if (run->parsed()) {
            return cmd_run(config_path, population, features, model, sex, seed,
                           run_seed->count() > 0, out_dir);
        }
        if (report->parsed()) {
            return cmd_report(config_path, out_dir);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
