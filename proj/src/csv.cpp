#include "mrn/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mrn/errors.hpp"

namespace mrn {

int CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return static_cast<int>(c);
    return -1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("csv: cannot open " + path + " for writing");
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out << ',';
        out << table.header[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw IoError("csv: ragged row while writing " + path);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
    if (!out) throw IoError("csv: write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("csv: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.header.size());
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw IoError("csv: malformed number at " + path + ":" + std::to_string(line_no));
            row.push_back(v);
            p = end;
            if (*p == ',') {
                ++p;
            } else if (*p == '\0') {
                break;
            } else {
                throw IoError("csv: unexpected character at " + path + ":" + std::to_string(line_no));
            }
        }
        if (row.size() != table.header.size())
            throw IoError("csv: row width mismatch at " + path + ":" + std::to_string(line_no));
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace mrn
