#include "text_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <istream>

#include "eate/error.hpp"

namespace eate::detail {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

CsvTable read_csv(std::istream& in, const std::vector<std::string>& header) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!have_header) {
      if (fields != header) {
        std::string want;
        for (std::size_t i = 0; i < header.size(); ++i) want += (i ? "," : "") + header[i];
        throw ParseError("expected header `" + want + "`", lineno);
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    table.rows.push_back({lineno, std::move(fields)});
  }
  if (!have_header) throw ParseError("empty input", 0);
  return table;
}

long parse_int(const std::string& s, std::size_t line) {
  if (s.empty()) throw ParseError("empty integer field", line);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || *end != '\0') throw ParseError("bad integer `" + s + "`", line);
  return v;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s.empty()) throw ParseError("empty numeric field", line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || *end != '\0') throw ParseError("bad number `" + s + "`", line);
  return v;
}

}  // namespace eate::detail

#include <charconv>
#include <cmath>

#include "eate/io.hpp"

namespace eate {

std::string format_real(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace eate
