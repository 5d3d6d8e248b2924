#pragma once

#include <string>
#include <vector>

namespace mrn {

// Numeric tables only; doubles are written with 17 significant digits so a
// read-back reproduces the exact bit pattern.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const; // -1 when absent
    double at(std::size_t row, int col) const { return rows[row][static_cast<std::size_t>(col)]; }
};

std::string format_double(double v);

void write_csv(const std::string& path, const CsvTable& table);

CsvTable read_csv(const std::string& path);

} // namespace mrn
