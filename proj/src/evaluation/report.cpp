#include "agelab/evaluation/report.hpp"

#include "agelab/common/csv.hpp"
#include "agelab/common/svg.hpp"

#include <algorithm>
#include <cmath>

namespace agelab::eval {

using util::CsvTable;
using util::format_double;

namespace {

std::string opt_str(const std::optional<double> &v) {
    return v ? format_double(*v) : std::string();
}

std::optional<double> opt_parse(const std::string &s) {
    if (s.empty()) {
        return std::nullopt;
    }
    return std::stod(s);
}

} // namespace

void save_gap_table(const std::filesystem::path &path, const GapTable &table) {
    CsvTable csv;
    csv.header = {"population",  "model",       "feature_set",  "disease",      "mean_healthy",
                  "mean_middle", "mean_unhealthy", "n_healthy", "n_middle",     "n_unhealthy",
                  "ood_healthy", "ood_middle",  "ood_unhealthy", "ordering_ok", "bold_ok"};
    for (const auto &row : table.rows) {
        csv.rows.push_back({row.population, row.model, row.feature_set, row.disease,
                            opt_str(row.mean_healthy), opt_str(row.mean_middle),
                            opt_str(row.mean_unhealthy), std::to_string(row.n_healthy),
                            std::to_string(row.n_middle), std::to_string(row.n_unhealthy),
                            row.ood_healthy ? "1" : "0", row.ood_middle ? "1" : "0",
                            row.ood_unhealthy ? "1" : "0", row.ordering_ok ? "1" : "0",
                            row.bold_ok ? "1" : "0"});
    }
    util::write_csv(path, csv);
}

GapTable load_gap_table(const std::filesystem::path &path) {
    CsvTable csv = util::read_csv(path);
    GapTable table;
    for (const auto &r : csv.rows) {
        GapRow row;
        row.population = r[0];
        row.model = r[1];
        row.feature_set = r[2];
        row.disease = r[3];
        row.mean_healthy = opt_parse(r[4]);
        row.mean_middle = opt_parse(r[5]);
        row.mean_unhealthy = opt_parse(r[6]);
        row.n_healthy = std::stoul(r[7]);
        row.n_middle = std::stoul(r[8]);
        row.n_unhealthy = std::stoul(r[9]);
        row.ood_healthy = r[10] == "1";
        row.ood_middle = r[11] == "1";
        row.ood_unhealthy = r[12] == "1";
        row.ordering_ok = r[13] == "1";
        row.bold_ok = r[14] == "1";
        table.rows.push_back(std::move(row));
    }
    return table;
}

void save_mortality_rows(const std::filesystem::path &path,
                         const std::vector<MortalityRow> &rows) {
    CsvTable csv;
    csv.header = {"population", "feature_set", "model",        "mode", "slope",
                  "r_squared",  "pcc",         "slope_p_value", "n"};
    for (const auto &row : rows) {
        csv.rows.push_back({row.population, row.feature_set, row.model, to_string(row.mode),
                            format_double(row.slope), format_double(row.r_squared),
                            format_double(row.pcc), format_double(row.slope_p_value),
                            std::to_string(row.n)});
    }
    util::write_csv(path, csv);
}

void save_survival_curve(const std::filesystem::path &path, const SurvivalCurve &curve) {
    CsvTable csv;
    csv.header = {"time", "survival", "at_risk"};
    for (const auto &p : curve.points) {
        csv.rows.push_back(
            {format_double(p.time), format_double(p.survival), std::to_string(p.at_risk)});
    }
    util::write_csv(path, csv);
}

void plot_ba_vs_ca(const std::filesystem::path &path,
                   const std::vector<model::BaEstimate> &estimates, const LineFit &fit,
                   const std::string &title) {
    double lo = 1e300, hi = -1e300;
    std::vector<double> xs, ys;
    xs.reserve(estimates.size());
    ys.reserve(estimates.size());
    for (const auto &e : estimates) {
        xs.push_back(e.ca);
        ys.push_back(e.ba);
        lo = std::min({lo, e.ca, e.ba});
        hi = std::max({hi, e.ca, e.ba});
    }
    util::SvgPlot plot(lo, hi, lo, hi, title, "chronological age [years]",
                       "biological age [years]");
    plot.add_points(xs, ys, "#3366cc");
    plot.add_line({lo, hi}, {lo, hi}, "red", 1.2);
    plot.add_line({lo, hi}, {fit.slope * lo + fit.intercept, fit.slope * hi + fit.intercept},
                  "black", 1.5, true);
    plot.add_caption("fit slope a=" + util::format_double(std::round(fit.slope * 1000) / 1000));
    plot.save(path);
}

void plot_survival(const std::filesystem::path &path, const std::vector<NamedCurve> &curves,
                   double horizon_days, const std::string &title, const std::string &caption) {
    double y_min = 1.0;
    for (const auto &nc : curves) {
        for (const auto &p : nc.curve.points) {
            y_min = std::min(y_min, p.survival);
        }
    }
    util::SvgPlot plot(0.0, horizon_days, std::max(0.0, y_min - 0.05), 1.0, title,
                       "time [days]", "survival probability");
    for (const auto &nc : curves) {
        std::vector<double> xs, ys;
        for (const auto &p : nc.curve.points) {
            xs.push_back(p.time);
            ys.push_back(p.survival);
        }
        plot.add_steps(xs, ys, nc.color);
        plot.add_caption(nc.name);
    }
    if (!caption.empty()) {
        plot.add_caption(caption);
    }
    plot.save(path);
}

void plot_binned_gap_curves(const std::filesystem::path &path,
                            const std::vector<BinnedCurve> &curves, const std::string &title) {
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto &c : curves) {
        for (const auto &p : c.points) {
            x_lo = std::min(x_lo, p.bin_start);
            x_hi = std::max(x_hi, p.bin_start);
            y_lo = std::min({y_lo, p.q_low, p.mean});
            y_hi = std::max({y_hi, p.q_high, p.mean});
        }
    }
    if (x_lo > x_hi) {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    util::SvgPlot plot(x_lo, x_hi, y_lo, y_hi, title, "chronological age bin [years]",
                       "gap [years]");
    const std::map<std::string, std::string> colors = {
        {"healthy", "#2a9d2a"}, {"middle", "#e0a800"}, {"unhealthy", "#d62728"}};
    for (const auto &c : curves) {
        std::vector<double> xs, means, lows, highs;
        for (const auto &p : c.points) {
            xs.push_back(p.bin_start);
            means.push_back(p.mean);
            lows.push_back(p.q_low);
            highs.push_back(p.q_high);
        }
        const auto it = colors.find(c.state);
        const std::string color = it != colors.end() ? it->second : "#555555";
        plot.add_band(xs, lows, highs, color);
        plot.add_line(xs, means, color, 1.8, c.state == "unhealthy");
        plot.add_caption(c.state);
    }
    plot.save(path);
}

} // namespace agelab::eval
