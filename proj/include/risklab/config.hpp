#pragma once

// Flat key-value configuration: `section.key = value` lines, '#' comments.
// Subcommands declare their accepted keys as a schema; anything outside the
// schema is rejected by name so typos cannot silently change an experiment.

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risklab/io.hpp"

namespace risklab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string key;
  std::string type;  // int, u64, real, bool, string, int_list, real_list
  std::string default_value;
  std::string help;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig from_string(const std::string& text, const std::string& origin = "<string>") {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#') continue;
      std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = detail::trim(t.substr(0, eq));
      std::string value = detail::trim(t.substr(eq + 1));
      if (!detail::valid_key(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KvConfig from_file(const std::filesystem::path& path) {
    return from_string(read_text_file(path), path.string());
  }

  // Accepts a single "key=value" override (the --set flag).
  void set_assignment(const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must look like key=value, got '" + assignment + "'");
    std::string key = detail::trim(assignment.substr(0, eq));
    std::string value = detail::trim(assignment.substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError("malformed key '" + key + "'");
    values_[key] = value;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  long long get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected integer, got '" + it->second + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected unsigned integer, got '" + it->second + "'");
    }
  }

  double get_real(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected real number, got '" + it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + it->second + "'");
  }

  std::vector<long long> get_int_list(const std::string& key, const std::string& def_csv) const {
    std::string raw = get_string(key, def_csv);
    std::vector<long long> out;
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        out.push_back(std::stoll(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected integer list, got '" + raw + "'");
      }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
  }

  std::vector<double> get_real_list(const std::string& key, const std::string& def_csv) const {
    std::string raw = get_string(key, def_csv);
    std::vector<double> out;
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected real list, got '" + raw + "'");
      }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key, const std::string& def_csv) const {
    std::string raw = get_string(key, def_csv);
    std::vector<std::string> out;
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  // Rejects any key not in the schema, naming the offender.
  void validate_keys(const std::vector<KeySpec>& schema) const {
    for (const auto& [key, value] : values_) {
      (void)value;
      bool known = false;
      for (const auto& spec : schema)
        if (spec.key == key) {
          known = true;
          break;
        }
      if (!known) throw ConfigError("unknown configuration key: " + key);
    }
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Sorted `key = value` lines; deterministic because the map is ordered.
  std::string serialize() const {
    std::string out;
    for (const auto& [key, value] : values_) {
      out += key;
      out += " = ";
      out += value;
      out += "\n";
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace risklab
