#pragma once

#include "gdse/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gdse::harness {

/// Sectioned key/value file (INI). Callers validate against a schema with
/// `reject_unknown` so typos fail fast instead of silently using defaults.
class Config {
public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& fallback) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      const std::vector<double>& fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Throws ConfigError naming the first key that is not in `allowed`.
  void reject_unknown(const std::map<std::string, std::set<std::string>>& allowed) const;

private:
  const std::string* find(const std::string& section, const std::string& key) const;

  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

} // namespace gdse::harness
