#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace agelab::cohort {

/// Diseases tracked by the morbidity labeling.
enum class Disease { dm, hbp, dlp, ms, cancer, cvd, cva };

const char *to_string(Disease d);
std::vector<Disease> all_diseases();
std::vector<Disease> tristate_diseases();

/// Per-feature entry of the feature registry.
struct FeatureSpec {
    std::string name;
    std::string unit;
    double normal_low = 0.0;
    double normal_high = 0.0;
    double missing_rate = 0.0;
    /// Diseases this biomarker is tied to (drives corrected-pair substitution).
    std::vector<Disease> disease_tags;
    /// Computed from chronological age; excluded from the entire feature set.
    bool derived_from_ca = false;
    /// Bioelectrical-impedance measurement; excluded from the entire feature set.
    bool impedance = false;
    /// Screened out of the KDM-dedicated feature list.
    bool tumor_marker = false;
    bool eyesight = false;
    bool categorical = false;

    bool tagged_with(Disease d) const;
};

/// Feature registry. Order is the canonical feature order everywhere.
class Schema {
  public:
    Schema() = default;
    explicit Schema(std::vector<FeatureSpec> features);

    const std::vector<FeatureSpec> &features() const { return features_; }
    std::size_t size() const { return features_.size(); }
    bool contains(const std::string &name) const;
    std::size_t index_of(const std::string &name) const;
    const FeatureSpec &at(const std::string &name) const;
    const FeatureSpec &at(std::size_t i) const { return features_[i]; }

    /// Registry restricted to the named features, preserving their given order.
    Schema subset(const std::vector<std::string> &names) const;

    /// Stable content hash; checkpoints refuse data whose schema hash differs.
    std::string hash() const;

    void save(const std::filesystem::path &path) const;
    static Schema load(const std::filesystem::path &path);

  private:
    std::vector<FeatureSpec> features_;
};

} // namespace agelab::cohort
