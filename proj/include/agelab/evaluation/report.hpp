#pragma once

#include "agelab/evaluation/gap_tables.hpp"
#include "agelab/evaluation/mortality.hpp"
#include "agelab/evaluation/stats_tests.hpp"

#include <filesystem>

namespace agelab::eval {

/// Gap tables as CSV (one row per disease, cells as columns).
void save_gap_table(const std::filesystem::path &path, const GapTable &table);
GapTable load_gap_table(const std::filesystem::path &path);

void save_mortality_rows(const std::filesystem::path &path,
                         const std::vector<MortalityRow> &rows);

/// Survival curve as (time, survival, at_risk) CSV triples.
void save_survival_curve(const std::filesystem::path &path, const SurvivalCurve &curve);

/// BA-vs-CA scatter with the fitted line and the BA = CA diagonal.
void plot_ba_vs_ca(const std::filesystem::path &path,
                   const std::vector<model::BaEstimate> &estimates, const LineFit &fit,
                   const std::string &title);

struct NamedCurve {
    std::string name;
    std::string color;
    SurvivalCurve curve;
};

void plot_survival(const std::filesystem::path &path, const std::vector<NamedCurve> &curves,
                   double horizon_days, const std::string &title,
                   const std::string &caption = "");

void plot_binned_gap_curves(const std::filesystem::path &path,
                            const std::vector<BinnedCurve> &curves, const std::string &title);

} // namespace agelab::eval
