#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pvs::csv {

/// Malformed CSV input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// %.17g, so values round-trip exactly. NaN and infinities as nan/inf/-inf.
std::string format_double(double v);

double parse_double(std::string_view field, std::size_t line);
long parse_long(std::string_view field, std::size_t line);

std::vector<std::string> split(std::string_view line, char sep = ',');

void write_metadata(std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& metadata);

/// A table read from disk: metadata lines ("# key=value"), header, data rows.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  ///< source line of each row

  /// Index of `name` in the header; throws ParseError when missing.
  std::size_t column(const std::string& name) const;
};

/// Reads a table; rows must have as many fields as the header.
Table read_table(std::istream& in);

}  // namespace pvs::csv
