#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace proxkit::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: comma separated, double-quote escaping, quoted fields may
/// span lines, CRLF accepted. Blank lines are skipped. `first_line` numbers
/// the first line of `text`.
std::vector<Row> read(std::string_view text, std::size_t first_line = 1);

/// Quotes a field when it contains a comma, quote or line break, or when
/// `always_quote` is set and the field is non-empty.
std::string escape(std::string_view field, bool always_quote = false);

/// Joins already-escaped fields with commas and a trailing LF.
std::string join_line(const std::vector<std::string>& fields);

/// Shortest decimal form that round-trips to the same double. NaN renders empty.
std::string format_double(double value);

/// Strict numeric parsing; throws Error(MalformedRow) naming `what` and `line`.
std::int64_t parse_int(std::string_view text, std::string_view what, std::size_t line);
double parse_double(std::string_view text, std::string_view what, std::size_t line);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace proxkit::csv
