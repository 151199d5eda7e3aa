#include "incidence/delimited.h"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "incidence/accounts.h"

namespace incidence {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool NeedsQuoting(std::string_view field, char delimiter) {
  return field.find_first_of(std::string{delimiter} + "\"\n\r") !=
         std::string_view::npos;
}

}  // namespace

DelimitedTable ParseDelimited(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool any_content = false;

  auto end_field = [&] {
    record.push_back(field_quoted ? field : std::string{Trim(field)});
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines are skipped.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
    any_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && Trim(field).empty()) {
      field.clear();
      in_quotes = true;
      field_quoted = true;
      any_content = true;
    } else if (c == delimiter) {
      end_field();
      any_content = true;
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      any_content = true;
    }
  }
  if (in_quotes) throw Error("unterminated quoted field");
  if (any_content || !field.empty() || !record.empty()) end_record();

  DelimitedTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  return table;
}

DelimitedTable ReadDelimited(const std::filesystem::path& path,
                             char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open table '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseDelimited(buffer.str(), delimiter);
}

void WriteDelimited(std::ostream& out, const DelimitedTable& table,
                    char delimiter) {
  auto write_record = [&](const std::vector<std::string>& record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
      if (i > 0) out << delimiter;
      const std::string& f = record[i];
      if (NeedsQuoting(f, delimiter)) {
        out << '"';
        for (char c : f) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << f;
      }
    }
    out << '\n';
  };
  write_record(table.header);
  for (const auto& row : table.rows) write_record(row);
}

std::string FormatRoundTrip(double value) {
  return fmt::format("{}", value);
}

double ParseNumber(std::string_view field, std::string_view context) {
  field = Trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw Error(fmt::format("{}: cannot parse number '{}'", context, field));
  }
  return value;
}

}  // namespace incidence
