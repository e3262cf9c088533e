#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace proxkit {

struct KeyValueEntry {
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` text. '#' starts a comment line; blank lines are ignored.
/// Duplicate keys and lines without '=' throw Error(InvalidArgument).
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, KeyValueEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, KeyValueEntry> entries_;
};

}  // namespace proxkit
