#include "roofs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "roofs/errors.hpp"

namespace roofs {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(what + ": expected a finite number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  return static_cast<std::size_t>(parse_u64(text, what));
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string rest = line.substr(eq + 1);
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    auto& bucket = cfg.values_[key];
    std::istringstream items(rest);
    std::string item;
    bool any = false;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty value for '" + key +
                          "'");
      }
      bucket.push_back(item);
      any = true;
    }
    if (!any) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty value for '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const std::vector<std::string>& KeyValueConfig::all(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing key '" + key + "'");
  }
  return it->second;
}

const std::string& KeyValueConfig::one(const std::string& key) const {
  const auto& v = all(key);
  if (v.size() != 1) {
    throw ConfigError(origin_ + ": key '" + key + "' must have exactly one value");
  }
  return v.front();
}

std::optional<std::string> KeyValueConfig::maybe(const std::string& key) const {
  if (!has(key)) {
    return std::nullopt;
  }
  return one(key);
}

double KeyValueConfig::number(const std::string& key) const { return parse_double(one(key), key); }

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::size_t KeyValueConfig::count(const std::string& key) const {
  return parse_count(one(key), key);
}

std::size_t KeyValueConfig::count_or(const std::string& key, std::size_t fallback) const {
  return has(key) ? count(key) : fallback;
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& v : all(key)) {
    out.push_back(parse_double(v, key));
  }
  return out;
}

std::vector<std::size_t> KeyValueConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& v : all(key)) {
    out.push_back(parse_count(v, key));
  }
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, values] : values_) {
    if (!allowed.count(key)) {
      throw ConfigError(origin_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace roofs
