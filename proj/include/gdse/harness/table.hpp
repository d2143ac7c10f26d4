#pragma once

#include "gdse/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gdse::harness {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// One long-format observation. replication = -1 marks an aggregate over
/// replications, t = -1 a per-run summary.
struct ResultRow {
  std::string experiment;
  std::string design;
  Index m = 0;
  Index n = 0;
  double eta = 0.0;
  int replication = -1;
  int t = -1;
  std::string metric;
  double value = 0.0;
};

struct Manifest {
  std::string experiment;
  std::map<std::string, std::string> config;  // fully resolved, defaults included
  std::uint64_t base_seed = 0;
  std::vector<std::string> notes;

  std::string canonical_config() const;
  std::string config_hash() const;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  Manifest manifest;

  void add(ResultRow row) { rows.push_back(std::move(row)); }
  void append(const std::vector<ResultRow>& more) { rows.insert(rows.end(), more.begin(), more.end()); }
};

/// Header plus one row per observation, doubles printed with %.17g.
void write_table_csv(std::ostream& os, const ResultTable& table);
std::vector<ResultRow> read_table_csv(std::istream& is);

void write_manifest_json(std::ostream& os, const Manifest& manifest);
Manifest read_manifest_json(std::istream& is);

std::string format_double(double v);

} // namespace gdse::harness
