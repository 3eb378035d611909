#include "agelab/cohort/types.hpp"

#include "agelab/common/error.hpp"

#include <algorithm>

namespace agelab::cohort {

const char *to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

Sex sex_from_string(const std::string &s) {
    if (s == "male" || s == "m" || s == "M") {
        return Sex::male;
    }
    if (s == "female" || s == "f" || s == "F") {
        return Sex::female;
    }
    throw ConfigError("unknown sex: " + s);
}

const char *to_string(TriState s) {
    switch (s) {
    case TriState::normal:
        return "normal";
    case TriState::pre:
        return "pre";
    case TriState::illness:
        return "illness";
    }
    return "?";
}

const char *to_string(BinaryState s) {
    return s == BinaryState::healthy ? "healthy" : "with_disease";
}

const char *to_string(OverallState s) {
    switch (s) {
    case OverallState::healthy:
        return "healthy";
    case OverallState::average:
        return "average";
    case OverallState::unhealthy:
        return "unhealthy";
    }
    return "?";
}

std::optional<double> SubjectRecord::biomarker(const Schema &schema,
                                               const std::string &name) const {
    return biomarkers[schema.index_of(name)];
}

bool MorbidityLabel::is_indeterminate(Disease d) const {
    return std::find(indeterminate.begin(), indeterminate.end(), d) != indeterminate.end();
}

TriState MorbidityLabel::tri(Disease d) const {
    switch (d) {
    case Disease::dm:
        return dm;
    case Disease::hbp:
        return hbp;
    case Disease::dlp:
        return dlp;
    default:
        throw AgelabError("tri() called for a binary disease");
    }
}

BinaryState MorbidityLabel::binary(Disease d) const {
    switch (d) {
    case Disease::ms:
        return ms;
    case Disease::cancer:
        return cancer;
    case Disease::cvd:
        return cvd;
    case Disease::cva:
        return cva;
    default:
        throw AgelabError("binary() called for a tri-state disease");
    }
}

bool MorbidityLabel::any_illness() const {
    if (dm == TriState::illness || hbp == TriState::illness || dlp == TriState::illness) {
        return true;
    }
    return ms == BinaryState::with_disease || cancer == BinaryState::with_disease ||
           cvd == BinaryState::with_disease || cva == BinaryState::with_disease;
}

OverallState overall_state(const MorbidityLabel &label) {
    if (label.any_illness()) {
        return OverallState::unhealthy;
    }
    bool all_normal = label.dm == TriState::normal && label.hbp == TriState::normal &&
                      label.dlp == TriState::normal;
    if (all_normal) {
        return OverallState::healthy;
    }
    return OverallState::average;
}

const char *to_string(PopulationKind k) {
    switch (k) {
    case PopulationKind::super_normal:
        return "super_normal";
    case PopulationKind::normal:
        return "normal";
    case PopulationKind::average:
        return "average";
    case PopulationKind::whole:
        return "whole";
    }
    return "?";
}

PopulationKind population_from_string(const std::string &s) {
    if (s == "super_normal") {
        return PopulationKind::super_normal;
    }
    if (s == "normal") {
        return PopulationKind::normal;
    }
    if (s == "average") {
        return PopulationKind::average;
    }
    if (s == "whole") {
        return PopulationKind::whole;
    }
    throw ConfigError("unknown population group: " + s);
}

} // namespace agelab::cohort
