#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace incidence {

// A delimited-text table: first row is the header, remaining rows are data.
// Fields may be double-quoted; "" inside quotes is a literal quote.
struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

DelimitedTable ParseDelimited(std::string_view text, char delimiter);
DelimitedTable ReadDelimited(const std::filesystem::path& path, char delimiter);

void WriteDelimited(std::ostream& out, const DelimitedTable& table,
                    char delimiter);

// Shortest decimal string that parses back to exactly `value`.
std::string FormatRoundTrip(double value);

// Parses a decimal-point number; throws incidence::Error naming `context`
// on failure (trailing garbage, empty field, out of range).
double ParseNumber(std::string_view field, std::string_view context);

}  // namespace incidence
