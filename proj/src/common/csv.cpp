#include "agelab/common/csv.hpp"

#include "agelab/common/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace agelab::util {

std::optional<std::size_t> CsvTable::column(const std::string &name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw AgelabError("cannot open CSV file: " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw AgelabError("empty CSV file: " + path.string());
    }
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        table.rows.push_back(split_line(line));
    }
    return table;
}

void write_csv(const std::filesystem::path &path, const CsvTable &table) {
    std::ofstream out(path);
    if (!out) {
        throw AgelabError("cannot write CSV file: " + path.string());
    }
    auto write_row = [&out](const std::vector<std::string> &row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << row[i];
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto &row : table.rows) {
        write_row(row);
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        std::ostringstream os;
        os << v;
        return os.str();
    }
    return std::string(buf, end);
}

} // namespace agelab::util
