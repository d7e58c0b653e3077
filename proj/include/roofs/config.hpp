#pragma once

// Flat "key = value" configuration files.
//
//   # comment to end of line
//   p = 2000
//   corruption_ratio = 0.1
//   corruption_ratio = 0.2, 0.3     # repeated keys and commas both build lists
//
// Keys are case-sensitive; surrounding whitespace is trimmed; blank lines are
// ignored. Values never contain commas.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace roofs {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  /// Every value given for `key`, in file order.
  const std::vector<std::string>& all(const std::string& key) const;
  /// The single value for `key`; ConfigError if absent or repeated.
  const std::string& one(const std::string& key) const;
  std::optional<std::string> maybe(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key) const;
  std::size_t count_or(const std::string& key, std::size_t fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;

  void set(const std::string& key, std::vector<std::string> values) { values_[key] = std::move(values); }

  /// ConfigError naming the first key not in `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::vector<std::string>>& entries() const { return values_; }

 private:
  std::map<std::string, std::vector<std::string>> values_;
  std::string origin_;
};

double parse_double(const std::string& text, const std::string& what);
std::size_t parse_count(const std::string& text, const std::string& what);
std::uint64_t parse_u64(const std::string& text, const std::string& what);

}  // namespace roofs
