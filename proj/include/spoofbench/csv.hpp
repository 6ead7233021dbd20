#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spoofbench::csv {

/// Splits one line on commas. No quoting support; fields are trimmed.
std::vector<std::string> split(std::string_view line);

/// Reads all non-empty lines; the first row is returned as the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or throws DataError.
  std::size_t column(std::string_view name) const;
};

Table read(std::istream& in, std::string_view source_name);
Table read_file(const std::string& path);

double to_double(const std::string& field, std::string_view what);
long long to_int(const std::string& field, std::string_view what);

/// Fixed-point formatting with `decimals` digits, "-0.000000" normalised to "0.000000".
std::string fixed(double value, int decimals);

/// Shortest-ish general formatting with `digits` significant digits (%.Ng).
std::string general(double value, int digits);

}  // namespace spoofbench::csv
