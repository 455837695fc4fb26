#pragma once

#include <string>
#include <vector>

namespace bridgemixed {

/// Minimal CSV table: header row plus string cells. Quoting is supported on
/// read; fields written by this project never need quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Full-precision decimal rendering that round-trips a double exactly.
std::string format_full(double v);
/// Fixed 6-significant-digit rendering for human-facing tables.
std::string format_table(double v);

bool parse_double(const std::string& s, double* out);
bool parse_long(const std::string& s, long* out);

}  // namespace bridgemixed
