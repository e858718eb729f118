#include "fsep/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fsep {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    fail("csv: missing channel column '" + name + "'");
}

std::vector<double> CsvTable::column_values(std::size_t index) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(row[index]);
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "csv: cannot open '" + path.string() + "'");

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split_line(line);
        if (table.header.empty()) {
            table.header = cells;
            require(!table.header.empty(), "csv '" + path.string() + "': empty header row");
            continue;
        }
        if (cells.size() != table.header.size()) {
            std::ostringstream os;
            os << "csv '" << path.string() << "': row " << line_no << " has " << cells.size()
               << " cells, expected " << table.header.size();
            fail(os.str());
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            row[c] = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || end != cells[c].c_str() + cells[c].size()) {
                std::ostringstream os;
                os << "csv '" << path.string() << "': non-numeric cell at row " << line_no
                   << ", column '" << table.header[c] << "' ('" << cells[c] << "')";
                fail(os.str());
            }
        }
        table.rows.push_back(std::move(row));
    }
    require(!table.header.empty(), "csv '" + path.string() + "': file is empty");
    return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    require(header.size() == columns.size(), "write_csv: header/column count mismatch");
    std::size_t nrows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns) {
        require(col.size() == nrows, "write_csv: ragged columns");
    }
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) {
        os << (c ? "," : "") << header[c];
    }
    os << '\n';
    for (std::size_t r = 0; r < nrows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            os << (c ? "," : "") << format_double(columns[c][r]);
        }
        os << '\n';
    }
    write_text(path, os.str());
}

void write_records_csv(const std::filesystem::path& path, const std::vector<SampledRecord>& records) {
    require(!records.empty(), "write_records_csv: no records");
    const auto& ref = records.front();
    std::vector<std::string> header{"t"};
    std::vector<std::vector<double>> columns{ref.time_grid()};
    for (const auto& r : records) {
        require(r.count() == ref.count() && r.sample_period == ref.sample_period &&
                    r.start_time == ref.start_time,
                "write_records_csv: records do not share a time grid");
        header.push_back(r.channel_id);
        columns.push_back(r.samples);
    }
    write_csv(path, header, columns);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write '" + path.string() + "'");
    out << content;
    require(out.good(), "failed while writing '" + path.string() + "'");
}

}  // namespace fsep
