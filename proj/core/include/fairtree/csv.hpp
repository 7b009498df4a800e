#pragma once

#include <string>
#include <vector>

namespace fairtree {

// Minimal RFC 4180 table: quoted fields, escaped quotes, newlines
// inside quotes. First row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; -1 when absent.
  int column_index(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);

}  // namespace fairtree
