#include "agibench/kv_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace agibench {

KvFile KvFile::parse(std::string_view text, const std::string& source) {
  KvFile kv;
  kv.source_ = source;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, "parse-error",
           source + ":" + std::to_string(line_no) + ": expected `key = value`, got `" + line + "`");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      fail(ErrorKind::config, "parse-error", source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (auto it = kv.entries_.find(key); it != kv.entries_.end()) {
      fail(ErrorKind::config, "parse-error",
           source + ":" + std::to_string(line_no) + ": duplicate key `" + key + "` (first at line " +
               std::to_string(it->second.line) + ")");
    }
    kv.entries_.emplace(std::move(key), Entry{std::move(value), line_no});
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::config, "file-missing", "cannot read config `" + path + "`");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void KvFile::fail_at(const std::string& key, const std::string& message) const {
  auto it = entries_.find(key);
  const std::string where = it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
  fail(ErrorKind::config, "parse-error", where + ": key `" + key + "`: " + message);
}

std::optional<std::string> KvFile::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<long long> KvFile::get_int(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc{} || ptr != s->data() + s->size()) fail_at(key, "expected an integer, got `" + *s + "`");
  return v;
}

std::optional<double> KvFile::get_double(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc{} || ptr != s->data() + s->size()) fail_at(key, "expected a number, got `" + *s + "`");
  return v;
}

std::optional<bool> KvFile::get_bool(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true") return true;
  if (*s == "false") return false;
  fail_at(key, "expected true or false, got `" + *s + "`");
}

std::optional<std::vector<std::string>> KvFile::get_list(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : split(*s, ',')) {
    auto t = trim(item);
    if (t.empty()) fail_at(key, "empty list item");
    out.push_back(std::move(t));
  }
  return out;
}

void KvFile::require_known(const std::vector<std::string>& allowed) const {
  const Entry* first = nullptr;
  std::string first_key;
  for (const auto& [key, entry] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    if (!first || entry.line < first->line) {
      first = &entry;
      first_key = key;
    }
  }
  if (first) {
    fail(ErrorKind::config, "unknown-key",
         source_ + ":" + std::to_string(first->line) + ": unknown key `" + first_key + "`");
  }
}

}  // namespace agibench
