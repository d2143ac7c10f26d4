#include "gdse/harness/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace gdse::harness {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

std::vector<const ResultRow*> select(const std::vector<ResultRow>& rows, const std::string& prefix,
                                     const std::set<std::string>& metrics) {
  std::vector<const ResultRow*> out;
  for (const auto& r : rows)
    if (r.experiment.rfind(prefix, 0) == 0 && metrics.count(r.metric) && r.replication == -1 && r.t >= 0)
      out.push_back(&r);
  return out;
}

std::vector<std::string> fig1(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  const auto sel = select(rows, "fig1", {"mean_abs_corr"});
  const std::string header = "t,design,mean_abs_corr\n";
  std::vector<std::string> files;
  if (sel.empty()) {
    auto p = dir / "fig1.csv";
    open_out(p) << header;
    return {p.string()};
  }
  std::map<Index, std::vector<const ResultRow*>> by_n;
  for (const auto* r : sel) by_n[r->n].push_back(r);
  for (const auto& [n, list] : by_n) {
    auto p = dir / ("fig1_n" + std::to_string(n) + ".csv");
    auto os = open_out(p);
    os << header;
    for (const auto* r : list) os << r->t << ',' << r->design << ',' << format_double(r->value) << '\n';
    files.push_back(p.string());
  }
  return files;
}

std::vector<std::string> fig2(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  const auto sel = select(rows, "fig2", {"mean_corr", "corr_hat"});
  const std::string header = "t,design,mean_corr,corr_hat\n";
  if (sel.empty()) {
    auto p = dir / "fig2.csv";
    open_out(p) << header;
    return {p.string()};
  }
  // link -> n -> t -> corr_hat, and link -> (n, design, t) -> mean_corr
  std::map<std::string, std::map<std::pair<Index, int>, double>> hat;
  std::map<std::string, std::map<std::tuple<Index, std::string, int>, double>> oracle;
  std::map<std::string, std::set<Index>> ns;
  for (const auto* r : sel) {
    const std::string link = r->experiment.size() > 5 ? r->experiment.substr(5) : "default";
    ns[link].insert(r->n);
    if (r->metric == "corr_hat") hat[link][{r->n, r->t}] = r->value;
    else oracle[link][{r->n, r->design, r->t}] = r->value;
  }
  std::vector<std::string> files;
  for (const auto& [link, nset] : ns) {
    auto p = dir / ("fig2_" + link + ".csv");
    auto os = open_out(p);
    os << (nset.size() > 1 ? "n," : "") << header;
    for (const auto& [key, v] : oracle[link]) {
      const auto& [n, design, t] = key;
      auto h = hat[link].find({n, t});
      if (nset.size() > 1) os << n << ',';
      os << t << ',' << design << ',' << format_double(v) << ','
         << (h == hat[link].end() ? std::string("nan") : format_double(h->second)) << '\n';
    }
    files.push_back(p.string());
  }
  return files;
}

std::vector<std::string> conc(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  const auto sel = select(rows, "conc", {"median_conc_error", "max_incoherence"});
  std::map<std::tuple<std::string, Index, Index, int>, std::pair<double, double>> cells;
  for (const auto* r : sel) {
    auto& c = cells[{r->design, r->n, r->m, r->t}];
    (r->metric == "median_conc_error" ? c.first : c.second) = r->value;
  }
  auto p = dir / "conc.csv";
  auto os = open_out(p);
  os << "design,n,phi,t,median_conc_error,max_incoherence\n";
  for (const auto& [key, v] : cells) {
    const auto& [design, n, m, t] = key;
    os << design << ',' << n << ',' << format_double(static_cast<double>(m) / static_cast<double>(n)) << ',' << t
       << ',' << format_double(v.first) << ',' << format_double(v.second) << '\n';
  }
  return {p.string()};
}

std::vector<std::string> mf(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  const auto sel = select(rows, "mf", {"offdiag_tau", "w_cov_max", "omega_gap"});
  std::map<std::tuple<Index, Index, int>, std::map<std::string, double>> cells;
  for (const auto* r : sel) cells[{r->n, r->m, r->t}][r->metric] = r->value;
  auto p = dir / "mf.csv";
  auto os = open_out(p);
  os << "n,phi,t,offdiag_tau,w_cov_max,omega_gap\n";
  for (auto& [key, v] : cells) {
    const auto& [n, m, t] = key;
    os << n << ',' << format_double(static_cast<double>(m) / static_cast<double>(n)) << ',' << t << ','
       << format_double(v["offdiag_tau"]) << ',' << format_double(v["w_cov_max"]) << ','
       << format_double(v["omega_gap"]) << '\n';
  }
  return {p.string()};
}

} // namespace

std::vector<std::string> emit_plotdata(const std::vector<ResultRow>& rows, const std::string& plot_id,
                                       const std::string& dir) {
  std::vector<std::string> (*writer)(const std::vector<ResultRow>&, const std::filesystem::path&) = nullptr;
  if (plot_id == "fig1") writer = fig1;
  else if (plot_id == "fig2") writer = fig2;
  else if (plot_id == "conc") writer = conc;
  else if (plot_id == "mf") writer = mf;
  else throw ConfigError("unknown plot id '" + plot_id + "' (expected fig1, fig2, conc or mf)");

  const std::filesystem::path out(dir);
  std::filesystem::create_directories(out);
  std::vector<std::string> files = writer(rows, out);

  nlohmann::ordered_json j;
  j["plot_id"] = plot_id;
  j["artifact_version"] = kArtifactVersion;
  j["source_rows"] = rows.size();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : files) list.push_back(std::filesystem::path(f).filename().string());
  j["files"] = list;
  const auto mpath = out / (plot_id + "_plotdata.json");
  open_out(mpath) << j.dump(2) << '\n';
  files.push_back(mpath.string());
  return files;
}

} // namespace gdse::harness
