#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsep/signal.hpp"

namespace fsep {

/// A rectangular numeric table with named columns: the canonical data
/// interchange format (header row, comma separated, decimal point, LF).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  ///< throws when missing
    std::vector<double> column_values(std::size_t index) const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Writes synchronized records as one table: a "t" column plus one column
/// per record, in the given order. All records must share the time grid.
void write_records_csv(const std::filesystem::path& path, const std::vector<SampledRecord>& records);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace fsep
