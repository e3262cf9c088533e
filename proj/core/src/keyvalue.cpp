#include "proxkit/keyvalue.hpp"

#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"

namespace proxkit {

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  std::size_t line_no = 0;
  for (const auto& raw : csv::split(text, '\n')) {
    ++line_no;
    const auto line = csv::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidArgument, "expected 'key = value'", line_no);
    }
    std::string key{csv::trim(line.substr(0, eq))};
    std::string value{csv::trim(line.substr(eq + 1))};
    if (key.empty()) {
      throw Error(Errc::InvalidArgument, "empty key", line_no);
    }
    auto [it, inserted] = file.entries_.emplace(key, KeyValueEntry{value, line_no});
    if (!inserted) {
      throw Error(Errc::InvalidArgument, "duplicate key '" + key + "'", line_no);
    }
  }
  return file;
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

}  // namespace proxkit
