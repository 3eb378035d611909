#include "agelab/cohort/schema.hpp"

#include "agelab/common/csv.hpp"
#include "agelab/common/error.hpp"
#include "agelab/common/fnv.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace agelab::cohort {

const char *to_string(Disease d) {
    switch (d) {
    case Disease::dm:
        return "dm";
    case Disease::hbp:
        return "hbp";
    case Disease::dlp:
        return "dlp";
    case Disease::ms:
        return "ms";
    case Disease::cancer:
        return "cancer";
    case Disease::cvd:
        return "cvd";
    case Disease::cva:
        return "cva";
    }
    return "?";
}

std::vector<Disease> all_diseases() {
    return {Disease::dm,     Disease::hbp, Disease::dlp, Disease::ms,
            Disease::cancer, Disease::cvd, Disease::cva};
}

std::vector<Disease> tristate_diseases() { return {Disease::dm, Disease::hbp, Disease::dlp}; }

namespace {

Disease disease_from_string(const std::string &s) {
    for (Disease d : all_diseases()) {
        if (s == to_string(d)) {
            return d;
        }
    }
    throw ConfigError("unknown disease tag: " + s);
}

} // namespace

bool FeatureSpec::tagged_with(Disease d) const {
    return std::find(disease_tags.begin(), disease_tags.end(), d) != disease_tags.end();
}

Schema::Schema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    std::unordered_map<std::string, int> seen;
    for (const auto &f : features_) {
        if (f.name.empty()) {
            throw ConfigError("schema feature with empty name");
        }
        if (++seen[f.name] > 1) {
            throw ConfigError("duplicate schema feature: " + f.name);
        }
    }
}

bool Schema::contains(const std::string &name) const {
    return std::any_of(features_.begin(), features_.end(),
                       [&](const FeatureSpec &f) { return f.name == name; });
}

std::size_t Schema::index_of(const std::string &name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) {
            return i;
        }
    }
    throw ConfigError("feature not in schema: " + name);
}

const FeatureSpec &Schema::at(const std::string &name) const { return features_[index_of(name)]; }

Schema Schema::subset(const std::vector<std::string> &names) const {
    std::vector<FeatureSpec> out;
    out.reserve(names.size());
    for (const auto &n : names) {
        out.push_back(at(n));
    }
    return Schema(std::move(out));
}

std::string Schema::hash() const {
    std::ostringstream os;
    for (const auto &f : features_) {
        os << f.name << '|' << f.unit << '|' << util::format_double(f.normal_low) << '|'
           << util::format_double(f.normal_high) << '|';
        for (Disease d : f.disease_tags) {
            os << to_string(d) << ';';
        }
        os << '|' << f.derived_from_ca << f.impedance << f.tumor_marker << f.eyesight
           << f.categorical << '\n';
    }
    return util::fnv1a64_hex(os.str());
}

void Schema::save(const std::filesystem::path &path) const {
    util::CsvTable table;
    table.header = {"name",         "unit",      "normal_low", "normal_high", "missing_rate",
                    "disease_tags", "derived_from_ca", "impedance",  "tumor_marker", "eyesight",
                    "categorical"};
    for (const auto &f : features_) {
        std::string tags;
        for (Disease d : f.disease_tags) {
            if (!tags.empty()) {
                tags += ';';
            }
            tags += to_string(d);
        }
        table.rows.push_back({f.name, f.unit, util::format_double(f.normal_low),
                              util::format_double(f.normal_high),
                              util::format_double(f.missing_rate), tags,
                              f.derived_from_ca ? "1" : "0", f.impedance ? "1" : "0",
                              f.tumor_marker ? "1" : "0", f.eyesight ? "1" : "0",
                              f.categorical ? "1" : "0"});
    }
    util::write_csv(path, table);
}

Schema Schema::load(const std::filesystem::path &path) {
    util::CsvTable table = util::read_csv(path);
    if (table.header.size() < 11) {
        throw ConfigError("schema file has unexpected header: " + path.string());
    }
    std::vector<FeatureSpec> features;
    for (const auto &row : table.rows) {
        FeatureSpec f;
        f.name = row[0];
        f.unit = row[1];
        f.normal_low = std::stod(row[2]);
        f.normal_high = std::stod(row[3]);
        f.missing_rate = std::stod(row[4]);
        std::stringstream tags(row[5]);
        std::string tag;
        while (std::getline(tags, tag, ';')) {
            if (!tag.empty()) {
                f.disease_tags.push_back(disease_from_string(tag));
            }
        }
        f.derived_from_ca = row[6] == "1";
        f.impedance = row[7] == "1";
        f.tumor_marker = row[8] == "1";
        f.eyesight = row[9] == "1";
        f.categorical = row[10] == "1";
        features.push_back(std::move(f));
    }
    return Schema(std::move(features));
}

} // namespace agelab::cohort
