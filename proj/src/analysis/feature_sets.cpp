#include "agelab/analysis/feature_sets.hpp"

#include "agelab/common/error.hpp"

namespace agelab::analysis {

const char *to_string(FeatureSetName name) {
    switch (name) {
    case FeatureSetName::base:
        return "base";
    case FeatureSetName::morbidity_related:
        return "morbidity_related";
    case FeatureSetName::entire:
        return "entire";
    }
    return "?";
}

FeatureSetName feature_set_from_string(const std::string &s) {
    if (s == "base") {
        return FeatureSetName::base;
    }
    if (s == "morbidity_related" || s == "morbidity-related") {
        return FeatureSetName::morbidity_related;
    }
    if (s == "entire") {
        return FeatureSetName::entire;
    }
    throw ConfigError("unknown feature set: " + s);
}

namespace {

void require_members(const cohort::Schema &schema, const std::vector<std::string> &members) {
    for (const auto &m : members) {
        if (!schema.contains(m)) {
            throw ConfigError("feature set member missing from schema: " + m);
        }
    }
}

} // namespace

FeatureSet build_feature_set(FeatureSetName name, const cohort::Schema &schema,
                             const FeatureSetOptions &options) {
    FeatureSet set;
    set.name = name;
    switch (name) {
    case FeatureSetName::base:
        require_members(schema, options.base_members);
        set.members = options.base_members;
        break;
    case FeatureSetName::morbidity_related:
        require_members(schema, options.base_members);
        require_members(schema, options.morbidity_members);
        set.members = options.base_members;
        set.members.insert(set.members.end(), options.morbidity_members.begin(),
                           options.morbidity_members.end());
        break;
    case FeatureSetName::entire:
        for (const auto &f : schema.features()) {
            if (!f.derived_from_ca && !f.impedance) {
                set.members.push_back(f.name);
            }
        }
        break;
    }
    return set;
}

std::vector<std::string> kdm_feature_screen(const cohort::Schema &schema,
                                            const FeatureSetOptions &options) {
    std::vector<std::string> out;
    for (const auto &name : build_feature_set(FeatureSetName::entire, schema, options).members) {
        const auto &f = schema.at(name);
        if (f.tumor_marker || f.eyesight || f.categorical) {
            continue;
        }
        out.push_back(name);
    }
    return out;
}

} // namespace agelab::analysis
