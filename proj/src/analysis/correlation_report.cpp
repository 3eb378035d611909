#include "agelab/analysis/correlation_report.hpp"

#include "agelab/analysis/stats.hpp"
#include "agelab/common/csv.hpp"
#include "agelab/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace agelab::analysis {

using cohort::CohortTable;
using cohort::PopulationGroup;
using cohort::Sex;

namespace {

/// Flag rows whose statistic is within the top fraction; ties at the boundary
/// are all included.
void flag_top(std::vector<CorrelationRow> &rows, double top_fraction,
              double (*stat)(const CorrelationRow &), bool CorrelationRow::*flag) {
    std::vector<double> values;
    for (const auto &row : rows) {
        const double v = stat(row);
        if (!std::isnan(v)) {
            values.push_back(v);
        }
    }
    if (values.empty()) {
        return;
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    auto count = static_cast<std::size_t>(std::ceil(top_fraction * values.size()));
    count = std::clamp<std::size_t>(count, 1, values.size());
    const double cutoff = values[count - 1];
    for (auto &row : rows) {
        const double v = stat(row);
        if (!std::isnan(v) && v >= cutoff) {
            row.*flag = true;
        }
    }
}

std::vector<CorrelationRow> analyze_slice(const CohortTable &cohort,
                                          const std::vector<std::size_t> &ids,
                                          const std::string &sex_name,
                                          const std::string &group_name,
                                          const CorrelationOptions &options) {
    std::vector<CorrelationRow> rows;
    for (std::size_t j = 0; j < cohort.schema.size(); ++j) {
        CorrelationRow row;
        row.feature = cohort.schema.at(j).name;
        row.sex = sex_name;
        row.group = group_name;

        std::vector<double> x, age;
        for (std::size_t id : ids) {
            if (auto v = cohort.records[id].biomarkers[j]) {
                x.push_back(*v);
                age.push_back(cohort.records[id].chronological_age);
            }
        }
        row.missing_rate = ids.empty() ? 1.0 : 1.0 - static_cast<double>(x.size()) / ids.size();
        row.excluded_missing = row.missing_rate > options.missing_threshold;
        if (!row.excluded_missing && x.size() >= static_cast<std::size_t>(options.mi_bins)) {
            try {
                row.pcc = pearson(x, age);
                row.srocc = spearman(x, age);
            } catch (const UndefinedStatisticError &) {
                // constant feature: leave statistics unset
            }
            row.mi = mutual_information(x, age, options.mi_bins);
        }
        rows.push_back(std::move(row));
    }
    flag_top(
        rows, options.top_fraction,
        [](const CorrelationRow &r) { return r.pcc ? std::abs(*r.pcc) : std::nan(""); },
        &CorrelationRow::top_pcc);
    flag_top(
        rows, options.top_fraction,
        [](const CorrelationRow &r) { return r.srocc ? std::abs(*r.srocc) : std::nan(""); },
        &CorrelationRow::top_srocc);
    flag_top(
        rows, options.top_fraction,
        [](const CorrelationRow &r) { return r.mi ? *r.mi : std::nan(""); },
        &CorrelationRow::top_mi);
    return rows;
}

} // namespace

CorrelationReport select_age_correlated_features(const CohortTable &cohort,
                                                 const PopulationGroup &group,
                                                 const CorrelationOptions &options) {
    if (group.member_ids.empty()) {
        throw AgelabError("select_age_correlated_features: empty group");
    }
    CorrelationReport report;
    const std::string group_name = to_string(group.kind);

    std::vector<std::size_t> males, females;
    for (std::size_t id : group.member_ids) {
        (cohort.records[id].sex == Sex::male ? males : females).push_back(id);
    }
    for (auto &row : analyze_slice(cohort, group.member_ids, "all", group_name, options)) {
        report.rows.push_back(std::move(row));
    }
    for (auto &row : analyze_slice(cohort, males, "male", group_name, options)) {
        report.rows.push_back(std::move(row));
    }
    for (auto &row : analyze_slice(cohort, females, "female", group_name, options)) {
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<std::string> CorrelationReport::flagged_features(const std::string &sex,
                                                             const std::string &group) const {
    std::vector<std::string> out;
    for (const auto &row : rows) {
        if (row.sex == sex && row.group == group && !row.excluded_missing &&
            (row.top_pcc || row.top_srocc || row.top_mi)) {
            out.push_back(row.feature);
        }
    }
    return out;
}

void CorrelationReport::save(const std::filesystem::path &path) const {
    util::CsvTable table;
    table.header = {"feature", "sex",          "group",   "pcc",    "srocc",
                    "mi",      "missing_rate", "excluded", "top_pcc", "top_srocc",
                    "top_mi"};
    for (const auto &row : rows) {
        auto fmt = [](const std::optional<double> &v) {
            return v ? util::format_double(*v) : std::string();
        };
        table.rows.push_back({row.feature, row.sex, row.group, fmt(row.pcc), fmt(row.srocc),
                              fmt(row.mi), util::format_double(row.missing_rate),
                              row.excluded_missing ? "1" : "0", row.top_pcc ? "1" : "0",
                              row.top_srocc ? "1" : "0", row.top_mi ? "1" : "0"});
    }
    util::write_csv(path, table);
}

} // namespace agelab::analysis
