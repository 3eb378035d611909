#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace agelab::util {

/// Minimal CSV support: comma separator, no quoting (field values in this
/// project never contain commas), empty field = missing.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string &name) const;
};

CsvTable read_csv(const std::filesystem::path &path);
void write_csv(const std::filesystem::path &path, const CsvTable &table);

/// Canonical float formatting for serialized tables: shortest round-trip form,
/// so re-emission of identical values is byte-identical.
std::string format_double(double v);

} // namespace agelab::util
