#pragma once

// key=value config files: '#' comments, blank lines ignored, whitespace
// trimmed around keys and values. Insertion order is preserved on write so a
// resolved manifest is byte-stable and can be fed straight back in as a config.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coev {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}
}  // namespace detail

class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse_stream(std::istream& in, const std::string& origin = "<stream>") {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = detail::trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": expected key=value, got '" + trimmed + "'");
      }
      const std::string key = detail::trim(trimmed.substr(0, eq));
      const std::string value = detail::trim(trimmed.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
      }
      kv.set(key, value);
    }
    return kv;
  }

  static KeyValues parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_stream(in, path);
  }

  static KeyValues parse_string(const std::string& text, const std::string& origin = "<string>") {
    std::istringstream in(text);
    return parse_stream(in, origin);
  }

  void set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      index_[key] = entries_.size();
      entries_.push_back({key, value});
    } else {
      entries_[it->second].second = value;
    }
  }

  void set_i64(const std::string& key, long long v) { set(key, std::to_string(v)); }
  void set_u64(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }

  void set_double(const std::string& key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    set(key, buf);
  }

  bool has(const std::string& key) const { return index_.count(key) != 0; }

  const std::string& get_string(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw ConfigError("missing config key: " + key);
    return entries_[it->second].second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = index_.find(key);
    return it == index_.end() ? fallback : entries_[it->second].second;
  }

  long long get_i64(const std::string& key) const { return parse_i64(key, get_string(key)); }
  long long get_i64(const std::string& key, long long fallback) const {
    return has(key) ? get_i64(key) : fallback;
  }

  int get_int(const std::string& key) const {
    const long long v = get_i64(key);
    if (v < -2147483648LL || v > 2147483647LL) {
      throw ConfigError("config key out of int range: " + key);
    }
    return static_cast<int>(v);
  }
  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string& s = get_string(key);
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not an unsigned integer: '" + s + "'");
    }
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const std::string& s = get_string(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: '" + s + "'");
    }
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  // Comma-separated integer list, e.g. "480,3600".
  std::vector<std::uint64_t> get_u64_list(const std::string& key) const {
    const std::string& s = get_string(key);
    std::vector<std::uint64_t> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        out.push_back(std::stoull(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad list item '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
  }
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          std::vector<std::uint64_t> fallback) const {
    return has(key) ? get_u64_list(key) : fallback;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
      out += k;
      out += '=';
      out += v;
      out += '\n';
    }
    return out;
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << to_string();
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  static long long parse_i64(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not an integer: '" + s + "'");
    }
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace coev
