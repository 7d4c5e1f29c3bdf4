#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace eate::detail {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

/// Comma-separated table with an exact header. Blank lines are skipped; a
/// row with the wrong field count is a ParseError.
CsvTable read_csv(std::istream& in, const std::vector<std::string>& header);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
long parse_int(const std::string& s, std::size_t line);
double parse_double(const std::string& s, std::size_t line);

}  // namespace eate::detail
