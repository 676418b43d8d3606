#pragma once

#include <string>
#include <vector>

namespace waveris {

// Shortest decimal representation that parses back to the same double.
// All file output goes through this so emitted numbers round-trip exactly.
std::string format_double(double value);
double parse_double(const std::string& text);

// Writes to <path>.tmp then renames, so readers never observe partial files.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Numeric CSV with a single header line; cells separated by ", ".
std::string csv_to_string(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
void write_csv(const CsvTable& table, const std::string& path);
CsvTable load_csv(const std::string& path);

} // namespace waveris
