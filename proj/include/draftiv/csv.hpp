#pragma once

#include <string>
#include <vector>

namespace draftiv {

// Minimal delimited-text table: header row plus string cells.
// Lines starting with '#' are treated as comments and skipped on read.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column by name, -1 if absent.
  int column(const std::string& name) const;
  bool has_column(const std::string& name) const { return column(name) >= 0; }
};

// Split one delimited line. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, char delim);

// Quote a field if it contains the delimiter, a quote, or a newline.
std::string csv_escape(const std::string& field, char delim);

CsvTable read_csv(const std::string& path, char delim = ',');

// comment, when non-empty, is written as a leading "# ..." line.
void write_csv(const std::string& path, const CsvTable& table, char delim = ',',
               const std::string& comment = "");

// Fixed 6-significant-digit formatting used for all machine-readable output.
std::string format_double(double v);

}  // namespace draftiv
