#include "proxkit/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "proxkit/error.hpp"

namespace proxkit::csv {

std::vector<Row> read(std::string_view text, std::size_t first_line) {
  std::vector<Row> rows;
  std::size_t line = first_line;
  std::size_t i = 0;
  const std::size_t n = text.size();

  while (i < n) {
    // blank line
    if (text[i] == '\n' || (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n')) {
      i += text[i] == '\r' ? 2 : 1;
      ++line;
      continue;
    }
    Row row;
    row.line = line;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool done = false;
    while (!done) {
      if (i >= n) {
        if (in_quotes) {
          throw Error(Errc::MalformedRow, "unterminated quoted field", row.line);
        }
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            throw Error(Errc::MalformedRow, "stray quote inside unquoted field", line);
          }
          in_quotes = true;
          field_was_quoted = true;
          ++i;
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++i;
          break;
        case '\r':
          if (i + 1 < n && text[i + 1] == '\n') {
            ++i;
            break;
          }
          throw Error(Errc::MalformedRow, "bare carriage return", line);
        case '\n':
          row.fields.push_back(std::move(field));
          ++i;
          ++line;
          done = true;
          break;
        default:
          if (field_was_quoted) {
            throw Error(Errc::MalformedRow, "characters after closing quote", line);
          }
          field.push_back(c);
          ++i;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string escape(std::string_view field, bool always_quote) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs && !(always_quote && !field.empty())) {
    return std::string(field);
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += fields[i];
  }
  out.push_back('\n');
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) {
    throw Error(Errc::InvalidArgument, "cannot format number");
  }
  return std::string(buf, ptr);
}

std::int64_t parse_int(std::string_view text, std::string_view what, std::size_t line) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw Error(Errc::MalformedRow,
                std::string(what) + " is not an integer: '" + std::string(text) + "'", line);
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what, std::size_t line) {
  double value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw Error(Errc::MalformedRow,
                std::string(what) + " is not a finite number: '" + std::string(text) + "'",
                line);
  }
  return value;
}

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace proxkit::csv
