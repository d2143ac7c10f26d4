#include "gdse/harness/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gdse;
using namespace gdse::harness;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gdse_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string csv(const ResultTable& t) {
  std::ostringstream os;
  write_table_csv(os, t);
  return os.str();
}

ExperimentConfig tiny_fig1() {
  ExperimentConfig c = default_experiment(ExperimentKind::Fig1PR);
  c.ns = {10};
  c.m = 200;
  c.replications = 3;
  c.t_max = 30;
  return c;
}

const ResultRow* find(const ResultTable& t, const std::string& metric, int rep, int time) {
  for (const auto& r : t.rows)
    if (r.metric == metric && r.replication == rep && r.t == time) return &r;
  return nullptr;
}

} // namespace

TEST_CASE("config parsing") {
  const Config c = Config::from_string("[model]\nlink = sigmoid\nsigma = 0.5\n[gd]\nsteps = 0.1, 0.2 ,0.3\nt_max=10\n");
  CHECK(c.has_section("model"));
  CHECK(!c.has_section("se"));
  CHECK(c.get_string("model", "link", "") == "sigmoid");
  CHECK(c.get_double("model", "sigma", 0.0) == 0.5);
  CHECK(c.get_int("gd", "t_max", 0) == 10);
  CHECK(c.get_int("gd", "missing", 7) == 7);
  CHECK(c.get_double_list("gd", "steps", {}) == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(c.get_list("gd", "steps", {}).at(1) == "0.2");

  CHECK_THROWS_AS(c.get_int("model", "sigma", 0), ConfigError);
  CHECK_THROWS_AS(c.get_double("model", "link", 0.0), ConfigError);
  CHECK_NOTHROW(c.reject_unknown({{"model", {"link", "sigma"}}, {"gd", {"steps", "t_max"}}}));
  CHECK_THROWS_AS(c.reject_unknown({{"model", {"link"}}, {"gd", {"steps", "t_max"}}}), ConfigError);
  CHECK_THROWS_AS(c.reject_unknown({{"model", {"link", "sigma"}}}), ConfigError);
  CHECK_THROWS_AS(Config::from_string("[broken\nx=1"), ConfigError);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("result table round trip") {
  ResultTable t;
  t.add({"fig1", "gaussian", 300, 10, 0.1, 2, 5, "abs_corr", 0.1 + 0.2});
  t.add({"fig2/sigmoid", "estimator", 1000, 30, 0.5, -1, -1, "sup_gap", 1.0 / 3.0});
  const std::string text = csv(t);
  CHECK(text.rfind("experiment,design,m,n,eta,replication,t,metric,value\n", 0) == 0);
  std::istringstream is(text);
  const auto rows = read_table_csv(is);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == t.rows[0].value);
  CHECK(rows[1].value == t.rows[1].value);
  CHECK(rows[1].experiment == "fig2/sigmoid");
  CHECK(rows[1].replication == -1);
  CHECK(rows[0].m == 300);

  std::istringstream bad("experiment,design\nx,y\n");
  CHECK_THROWS_AS(read_table_csv(bad), ConfigError);
}

TEST_CASE("manifest round trip") {
  const Manifest m = tiny_fig1().manifest();
  CHECK(m.experiment == "fig1");
  CHECK(m.base_seed == 20240601);
  std::ostringstream os;
  write_manifest_json(os, m);
  std::istringstream is(os.str());
  const Manifest back = read_manifest_json(is);
  CHECK(back.config == m.config);
  CHECK(back.config_hash() == m.config_hash());

  std::string tampered = os.str();
  const auto pos = tampered.find("\"t_max\": \"30\"");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 13, "\"t_max\": \"31\"");
  std::istringstream ts(tampered);
  CHECK_THROWS_AS(read_manifest_json(ts), ConfigError);

  const ExperimentConfig again = experiment_from_manifest(back);
  CHECK(again.t_max == 30);
  CHECK(again.ns == std::vector<Index>{10});
}

TEST_CASE("experiment config from a file section") {
  const Config c = Config::from_string("[experiment]\nn = 20, 40\nreplications = 2\n");
  const ExperimentConfig e = experiment_from_config(ExperimentKind::ConcSweep, c);
  CHECK(e.ns == std::vector<Index>{20, 40});
  CHECK(e.replications == 2);
  CHECK(e.phis == default_experiment(ExperimentKind::ConcSweep).phis);
  CHECK_THROWS_AS(parse_experiment_kind("fig9"), ConfigError);
  CHECK(experiment_name(parse_experiment_kind("mf")) == "mf");

  ExperimentConfig bad = default_experiment(ExperimentKind::Fig2Corr);
  bad.etas.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("runs are deterministic and thread independent") {
  ExperimentConfig c = tiny_fig1();
  const std::string one = csv(run_fig1(c));
  c.threads = 3;
  const std::string three = csv(run_fig1(c));
  CHECK(one == three);

  std::ostringstream os;
  write_manifest_json(os, c.manifest());
  std::istringstream is(os.str());
  const std::string rerun = csv(run_experiment(experiment_from_manifest(read_manifest_json(is))));
  CHECK(one == rerun);

  c.seed += 1;
  CHECK(csv(run_fig1(c)) != one);
}

TEST_CASE("fig1 rows") {
  const ResultTable t = run_fig1(tiny_fig1());
  int reps = 0;
  for (const auto& r : t.rows) {
    if (r.metric == "init_scaled_corr") {
      ++reps;
      CHECK(r.value >= 0.65);
      CHECK(r.value <= 0.75);
    }
    if (r.metric == "mean_abs_corr") {
      CHECK(r.value >= 0.0);
      CHECK(r.value <= 1.0);
    }
  }
  CHECK(reps == 9);

  const auto dir = scratch("fig1");
  const auto files = emit_plotdata(t.rows, "fig1", dir.string());
  REQUIRE(files.size() == 2);
  const std::string body = slurp(files[0]);
  CHECK(body.rfind("t,design,mean_abs_corr\n", 0) == 0);
  CHECK(body.find("rademacher") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "fig1_plotdata.json"));
}

TEST_CASE("fig1 over several n writes one panel each") {
  ExperimentConfig c = tiny_fig1();
  c.ns = {6, 8, 10};
  c.replications = 1;
  c.t_max = 5;
  const auto dir = scratch("fig1_panels");
  const auto files = emit_plotdata(run_fig1(c).rows, "fig1", dir.string());
  CHECK(files.size() == 4);
  for (int n : {6, 8, 10}) CHECK(std::filesystem::exists(dir / ("fig1_n" + std::to_string(n) + ".csv")));
}

TEST_CASE("fig2 with a zero step keeps every track flat") {
  ExperimentConfig c = default_experiment(ExperimentKind::Fig2Corr);
  c.designs = {"gaussian"};
  c.ns = {20};
  c.m = 200;
  c.links = {"sigmoid"};
  c.etas = {0.0};
  c.replications = 2;
  c.t_max = 5;
  const ResultTable t = run_fig2(c);
  std::vector<double> hat, oracle;
  for (const auto& r : t.rows) {
    if (r.metric == "corr_hat") hat.push_back(r.value);
    if (r.metric == "mean_corr") oracle.push_back(r.value);
  }
  REQUIRE(hat.size() == 6);
  REQUIRE(oracle.size() == 6);
  for (double v : hat) CHECK(v == hat.front());
  for (double v : oracle) CHECK(v == oracle.front());

  const auto dir = scratch("fig2");
  const auto files = emit_plotdata(t.rows, "fig2", dir.string());
  CHECK(slurp(files[0]).rfind("t,design,mean_corr,corr_hat\n", 0) == 0);
  CHECK(std::filesystem::path(files[0]).filename() == "fig2_sigmoid.csv");
}

TEST_CASE("concentration error starts at zero") {
  ExperimentConfig c = default_experiment(ExperimentKind::ConcSweep);
  c.phis = {20.0};
  c.replications = 2;
  c.t_max = 3;
  c.ns = {10};
  const ResultTable t = run_conc_sweep(c);
  const ResultRow* r0 = find(t, "conc_error", 0, 0);
  REQUIRE(r0);
  CHECK(r0->value < 1e-12);
  const ResultRow* r3 = find(t, "conc_error", 1, 3);
  REQUIRE(r3);
  CHECK(r3->value > 0.0);
  const auto files = emit_plotdata(t.rows, "conc", scratch("conc").string());
  CHECK(slurp(files[0]).rfind("design,n,phi,t,median_conc_error,max_incoherence\n", 0) == 0);
}

TEST_CASE("mean-field sweep rows") {
  ExperimentConfig c = default_experiment(ExperimentKind::MfSweep);
  c.ns = {10};
  c.phis = {10.0, 100.0};
  c.mc_draws = 2000;
  const ResultTable t = run_mf_sweep(c);
  int count = 0;
  for (const auto& r : t.rows) count += r.metric == "omega_gap";
  CHECK(count == 2 * c.t_max);
  const auto files = emit_plotdata(t.rows, "mf", scratch("mf").string());
  CHECK(slurp(files[0]).rfind("n,phi,t,offdiag_tau,w_cov_max,omega_gap\n", 0) == 0);
}

TEST_CASE("plot data edge cases") {
  const auto dir = scratch("empty");
  const auto files = emit_plotdata({}, "fig1", dir.string());
  REQUIRE(files.size() == 2);
  CHECK(slurp(files[0]) == "t,design,mean_abs_corr\n");
  CHECK_THROWS_AS(emit_plotdata({}, "fig7", dir.string()), ConfigError);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 10, 100}, {2, 0.2, 0.02}) == doctest::Approx(-1.0));
  CHECK(loglog_slope({1, 4, 16}, {1, 0.5, 0.25}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), ConfigError);
}
