#include "gdse/harness/table.hpp"

#include "gdse/harness/config.hpp"

#include <json.hpp>

#include <boost/algorithm/string.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace gdse::harness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Manifest::canonical_config() const {
  std::string out = "experiment=" + experiment + "\n";
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

std::string Manifest::config_hash() const { return hex64(fnv1a(canonical_config())); }

void write_table_csv(std::ostream& os, const ResultTable& table) {
  os << "experiment,design,m,n,eta,replication,t,metric,value\n";
  for (const auto& r : table.rows)
    os << r.experiment << ',' << r.design << ',' << r.m << ',' << r.n << ',' << format_double(r.eta) << ','
       << r.replication << ',' << r.t << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

std::vector<ResultRow> read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || boost::algorithm::trim_copy(line) != "experiment,design,m,n,eta,replication,t,metric,value")
    throw ConfigError("result table: unexpected header");
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (boost::algorithm::trim_copy(line).empty()) continue;
    std::vector<std::string> f;
    boost::algorithm::split(f, line, boost::algorithm::is_any_of(","));
    if (f.size() != 9) throw ConfigError("result table line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      ResultRow r;
      r.experiment = f[0];
      r.design = f[1];
      r.m = std::stoll(f[2]);
      r.n = std::stoll(f[3]);
      r.eta = std::stod(f[4]);
      r.replication = std::stoi(f[5]);
      r.t = std::stoi(f[6]);
      r.metric = f[7];
      r.value = std::stod(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ConfigError("result table line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return rows;
}

void write_manifest_json(std::ostream& os, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["artifact_version"] = kArtifactVersion;
  j["experiment"] = manifest.experiment;
  j["config_hash"] = manifest.config_hash();
  j["base_seed"] = manifest.base_seed;
  j["seed_rule"] = "replication r uses base ^ (r * 0x9E3779B97F4A7C15) on a per-cell stream";
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.config) cfg[k] = v;
  j["config"] = cfg;
  j["notes"] = manifest.notes;
  os << j.dump(2) << '\n';
}

Manifest read_manifest_json(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  Manifest m;
  try {
    m.experiment = j.at("experiment").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("config").items()) m.config[k] = v.get<std::string>();
    if (j.contains("notes")) m.notes = j["notes"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (j.contains("config_hash") && j["config_hash"].get<std::string>() != m.config_hash())
    throw ConfigError("manifest: config hash does not match its config");
  return m;
}

} // namespace gdse::harness
