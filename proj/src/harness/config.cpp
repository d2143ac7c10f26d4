#include "gdse/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <boost/algorithm/string.hpp>

#include <cstdio>
#include <sstream>

namespace gdse::harness {

namespace {

Config from_ptree(const boost::property_tree::ptree& tree) {
  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) c.set(section, key, value.get_value<std::string>());
  }
  return c;
}

} // namespace

Config Config::from_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return from_ptree(tree);
}

Config Config::from_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return from_ptree(tree);
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  values_[section][key] = boost::algorithm::trim_copy(value);
}

const std::string* Config::find(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

bool Config::has_section(const std::string& section) const { return values_.count(section) > 0; }

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + *v + "'");
  }
}

long long Config::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long d = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": expected an integer, got '" + *v + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long d = std::stoull(*v, &used, 0);
    if (used != v->size() || v->front() == '-') throw std::invalid_argument("bad");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": expected an unsigned integer, got '" + *v + "'");
  }
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, *v, boost::algorithm::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  if (out.empty()) throw ConfigError("[" + section + "] " + key + ": empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& s : get_list(section, key, {})) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": expected numbers, got '" + s + "'");
    }
  }
  return out;
}

void Config::reject_unknown(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [section, body] : values_) {
    auto a = allowed.find(section);
    if (a == allowed.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& kv : body)
      if (!a->second.count(kv.first)) throw ConfigError("unknown config key [" + section + "] " + kv.first);
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace gdse::harness
