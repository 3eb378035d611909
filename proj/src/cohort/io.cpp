#include "agelab/cohort/io.hpp"

#include "agelab/cohort/labeling.hpp"
#include "agelab/common/csv.hpp"
#include "agelab/common/error.hpp"

#include <string>
#include <unordered_map>

namespace agelab::cohort {

using util::CsvTable;
using util::format_double;

void save_cohort(const std::filesystem::path &dir, const CohortTable &cohort) {
    std::filesystem::create_directories(dir);
    cohort.schema.save(dir / "schema.csv");

    CsvTable main;
    main.header = {"id",      "sex",      "chronological_age", "dm_med",  "hbp_med",
                   "dlp_med", "cancer_hist", "cvd_hist",       "cva_hist", "true_aging_rate"};
    for (const auto &f : cohort.schema.features()) {
        main.header.push_back(f.name);
    }
    for (const auto &r : cohort.records) {
        std::vector<std::string> row = {r.id,
                                        to_string(r.sex),
                                        format_double(r.chronological_age),
                                        r.dm_medication ? "1" : "0",
                                        r.hbp_medication ? "1" : "0",
                                        r.dlp_medication ? "1" : "0",
                                        r.cancer_history ? "1" : "0",
                                        r.cvd_history ? "1" : "0",
                                        r.cva_history ? "1" : "0",
                                        format_double(r.true_aging_rate)};
        for (const auto &v : r.biomarkers) {
            row.push_back(v ? format_double(*v) : "");
        }
        main.rows.push_back(std::move(row));
    }
    util::write_csv(dir / "cohort.csv", main);

    CsvTable events;
    events.header = {"id", "event_type", "days"};
    for (const auto &r : cohort.records) {
        if (r.death) {
            events.rows.push_back({r.id, "death", std::to_string(r.death->days_to_death)});
        }
        if (r.dm_onset_days) {
            events.rows.push_back({r.id, "dm_onset", std::to_string(*r.dm_onset_days)});
        }
    }
    util::write_csv(dir / "events.csv", events);
}

CohortTable load_cohort(const std::filesystem::path &dir) {
    CohortTable cohort;
    cohort.schema = Schema::load(dir / "schema.csv");
    CsvTable main = util::read_csv(dir / "cohort.csv");
    const std::size_t n_meta = 10;
    if (main.header.size() != n_meta + cohort.schema.size()) {
        throw AgelabError("cohort.csv does not match schema.csv");
    }
    std::size_t row_index = 0;
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto &row : main.rows) {
        SubjectRecord r;
        r.id = row[0];
        r.sex = sex_from_string(row[1]);
        r.chronological_age = std::stod(row[2]);
        r.dm_medication = row[3] == "1";
        r.hbp_medication = row[4] == "1";
        r.dlp_medication = row[5] == "1";
        r.cancer_history = row[6] == "1";
        r.cvd_history = row[7] == "1";
        r.cva_history = row[8] == "1";
        r.true_aging_rate = std::stod(row[9]);
        r.biomarkers.resize(cohort.schema.size());
        for (std::size_t j = 0; j < cohort.schema.size(); ++j) {
            const std::string &cell = row[n_meta + j];
            if (!cell.empty()) {
                r.biomarkers[j] = std::stod(cell);
            }
        }
        by_id[r.id] = row_index++;
        cohort.records.push_back(std::move(r));
    }

    CsvTable events = util::read_csv(dir / "events.csv");
    for (const auto &row : events.rows) {
        auto it = by_id.find(row[0]);
        if (it == by_id.end()) {
            throw AgelabError("events.csv references unknown subject: " + row[0]);
        }
        SubjectRecord &r = cohort.records[it->second];
        if (row[1] == "death") {
            DeathRecord d;
            d.days_to_death = std::stoi(row[2]);
            d.cause = "all";
            r.death = d;
        } else if (row[1] == "dm_onset") {
            r.dm_onset_days = std::stoi(row[2]);
        } else {
            throw AgelabError("events.csv has unknown event type: " + row[1]);
        }
    }
    label_cohort(cohort);
    return cohort;
}

} // namespace agelab::cohort
