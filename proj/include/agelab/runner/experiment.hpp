#pragma once

#include "agelab/runner/config.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>

namespace agelab::runner {

struct CellKey {
    std::string sex; // "male" / "female" / "all"
    cohort::PopulationKind population = cohort::PopulationKind::whole;
    analysis::FeatureSetName feature_set = analysis::FeatureSetName::base;
    std::string model;
    std::uint64_t seed = 0;

    std::string name() const;
};

struct CellResult {
    CellKey key;
    std::string status; // "done" or "failed: <reason>"
    std::vector<std::string> artifacts;
    double wall_seconds = 0.0;
};

struct RunManifest {
    std::string config_hash;
    std::string version = kVersionTag;
    std::vector<CellResult> cells;

    void save(const std::filesystem::path &path) const;
    static RunManifest load(const std::filesystem::path &path);
    bool cell_done(const CellKey &key) const;
};

/// Execute the full (sex x population x feature set x model x seed) grid,
/// then aggregate seed-averaged tables and plots. Cells already marked done
/// in an existing manifest with the same config hash are skipped. Individual
/// cell failures are recorded; the rest of the grid still runs.
RunManifest run_experiment(const ExperimentConfig &config);

/// Rebuild the aggregated tables/ curves/ plots/ tree from per-cell metrics.
void emit_report(const ExperimentConfig &config, const RunManifest &manifest);

} // namespace agelab::runner
