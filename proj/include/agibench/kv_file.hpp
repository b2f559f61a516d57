#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

/// Strict `key = value` text format. `#` starts a comment line, blank lines
/// are ignored, keys are unique. Values are raw strings; typed accessors
/// report the offending key and line on conversion failure.
class KvFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KvFile parse(std::string_view text, const std::string& source = "<text>");
  static KvFile load(const std::string& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  // Comma separated, whitespace trimmed, empty items rejected.
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;

  // Throws config/unknown-key naming the first key (by line) not in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

  [[noreturn]] void fail_at(const std::string& key, const std::string& message) const;

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace agibench
