#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace par::csv {

using Row = std::vector<std::string>;

/// Splits one line; fields may be double-quoted with "" as an escaped quote.
Row split_line(std::string_view line);

struct Table {
  Row header;
  std::vector<Row> rows;
  /// 1-based line numbers of rows, for error messages.
  std::vector<std::size_t> line_numbers;
};

/// Reads a whole file. Blank lines are skipped; a UTF-8 BOM is stripped.
Table read_file(const std::filesystem::path& path);

/// Quotes the field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

/// Shortest round-trip decimal form.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace par::csv
