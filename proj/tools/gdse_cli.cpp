// Command-line front end: single runs of each module plus the experiment
// drivers. Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include "gdse/design.hpp"
#include "gdse/estimator.hpp"
#include "gdse/gd.hpp"
#include "gdse/harness/config.hpp"
#include "gdse/harness/experiments.hpp"
#include "gdse/harness/table.hpp"
#include "gdse/meanfield.hpp"
#include "gdse/model.hpp"
#include "gdse/state_evolution.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <thread>

using namespace gdse;
using gdse::harness::Config;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out = ".";
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model", {"link", "noise", "noise_sigma", "noise_mean"}},
      {"problem", {"n", "m", "design", "signal", "signal_norm", "init", "init_scale"}},
      {"gd", {"eta", "t_max", "record_every", "early_stop", "divergence_cutoff", "iterates"}},
      {"se", {"eta", "t_max", "eps_n", "nodes", "fixed_point"}},
      {"estimator", {"eta", "t_max", "gamma0", "alpha0", "backend", "nodes", "draws", "signal_norm"}},
      {"meanfield", {"eta", "phi", "t_max", "mc_draws", "p", "chunk"}},
      {"experiment", harness::experiment_keys()},
  };
  return s;
}

Config load(const Globals& g) {
  Config c = g.config_path.empty() ? Config{} : Config::from_file(g.config_path);
  c.reject_unknown(schema());
  return c;
}

std::filesystem::path out_dir(const Globals& g) {
  std::filesystem::path p(g.out);
  std::filesystem::create_directories(p);
  return p;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

ModelSpec model_from(const Config& c) {
  const LinkFunction link = parse_link(c.get_string("model", "link", "identity"));
  const std::string noise = c.get_string("model", "noise", "zero");
  const double mean = c.get_double("model", "noise_mean", 0.0);
  NoiseSpec ns;
  if (noise == "zero") {
    if (mean != 0.0) throw ConfigError("[model] noise_mean needs noise = gaussian");
    ns = NoiseSpec::zero();
  } else if (noise == "gaussian") {
    const double sigma = c.get_double("model", "noise_sigma", 1.0);
    if (!(sigma >= 0.0)) throw ConfigError("[model] noise_sigma must be nonnegative");
    ns = NoiseSpec::gaussian(sigma, mean);
  } else {
    throw ConfigError("[model] noise must be zero or gaussian");
  }
  return ModelSpec::squared_on_link(link, ns);
}

struct Problem {
  Index n = 0, m = 0;
  DesignKind design;
  Vector mu_star, mu0;
};

Problem problem_from(const Config& c, std::uint64_t seed) {
  Problem p;
  p.n = c.get_int("problem", "n", 50);
  p.m = c.get_int("problem", "m", 1000);
  if (p.n < 1 || p.m < 1) throw ConfigError("[problem] n and m must be positive");
  p.design = parse_design_kind(c.get_string("problem", "design", "gaussian"));
  const double norm = c.get_double("problem", "signal_norm", 1.0);
  const std::string signal = c.get_string("problem", "signal", "flat");
  if (signal == "flat") p.mu_star = Vector::Constant(p.n, norm / std::sqrt(static_cast<double>(p.n)));
  else if (signal == "e1") p.mu_star = norm * Vector::Unit(p.n, 0);
  else throw ConfigError("[problem] signal must be flat or e1");

  const std::string init = c.get_string("problem", "init", "gaussian");
  const double scale = c.get_double("problem", "init_scale", 1.0);
  if (init == "gaussian") {
    std::mt19937_64 rng(replication_seed(seed, 2));
    std::normal_distribution<double> d(0.0, scale / std::sqrt(static_cast<double>(p.n)));
    p.mu0.resize(p.n);
    for (Index i = 0; i < p.n; ++i) p.mu0(i) = d(rng);
  } else if (init == "zero") {
    p.mu0 = Vector::Zero(p.n);
  } else if (init == "signal") {
    p.mu0 = scale * p.mu_star;
  } else {
    throw ConfigError("[problem] init must be gaussian, zero or signal");
  }
  return p;
}

int cmd_sample(const Globals& g, const std::string& design, Index m, Index n, const std::string& dump) {
  load(g);
  const DesignMatrix x = sample_design(parse_design_kind(design), m, n, g.seed.value_or(0));
  std::printf("{\"design\": \"%s\", \"m\": %lld, \"n\": %lld, \"seed\": %llu, \"aspect_ratio\": %.17g, "
              "\"moments\": [%.17g, %.17g, %.17g, %.17g]}\n",
              x.kind.name().c_str(), static_cast<long long>(m), static_cast<long long>(n),
              static_cast<unsigned long long>(x.seed), x.aspect_ratio(), empirical_moments(x, 1),
              empirical_moments(x, 2), empirical_moments(x, 3), empirical_moments(x, 4));
  if (!dump.empty()) {
    auto os = open_out(out_dir(g) / dump);
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) os << (j ? "," : "") << harness::format_double(x.entries(i, j));
      os << '\n';
    }
  }
  return 0;
}

int cmd_gd(const Globals& g) {
  const Config c = load(g);
  const std::uint64_t seed = g.seed.value_or(0);
  const ModelSpec model = model_from(c);
  const Problem p = problem_from(c, seed);
  const DesignMatrix x = sample_design(p.design, p.m, p.n, replication_seed(seed, 0));
  const Responses resp = generate_response(x, p.mu_star, model, replication_seed(seed, 1));

  GdConfig gc;
  gc.steps = StepSchedule(c.get_double("gd", "eta", 0.1));
  gc.t_max = static_cast<int>(c.get_int("gd", "t_max", 100));
  gc.record_every = static_cast<int>(c.get_int("gd", "record_every", 1));
  gc.early_stop_corr = c.get_double("gd", "early_stop", 0.0);
  gc.divergence_cutoff = c.get_double("gd", "divergence_cutoff", 1e12);
  gc.init = p.mu0;
  const std::string iterates = c.get_string("gd", "iterates", "");
  gc.keep_iterates = !iterates.empty();

  const SeTrack se = se_run(SeGeometry::from_vectors(p.mu0, p.mu_star), model, gc.steps, gc.t_max);
  const GdTrajectory tr = run_gd(x, resp.y, model, gc, {p.mu_star, se.path(p.mu0, p.mu_star)});
  const auto dir = out_dir(g);
  {
    auto os = open_out(dir / "gd_trajectory.csv");
    write_trajectory_csv(os, tr);
  }
  if (!iterates.empty()) {
    std::ofstream os(dir / iterates, std::ios::binary);
    if (!os) throw ConfigError("cannot write iterates file");
    write_iterates_binary(os, tr);
  }
  const auto& last = tr.records.back();
  std::printf("gd: t=%d corr=%.6f conc_error=%.6g%s\n", tr.last_t, last.corr, last.conc_error,
              tr.diverged ? " (diverged)" : "");
  return tr.diverged ? 3 : 0;
}

int cmd_se(const Globals& g) {
  const Config c = load(g);
  const std::uint64_t seed = g.seed.value_or(0);
  const ModelSpec model = model_from(c);
  const Problem p = problem_from(c, seed);
  const int nodes = static_cast<int>(c.get_int("se", "nodes", kDefaultNodes));
  const StepSchedule steps(c.get_double("se", "eta", 0.1));
  const SeTrack track =
      se_run(SeGeometry::from_vectors(p.mu0, p.mu_star), model, steps, static_cast<int>(c.get_int("se", "t_max", 100)),
             nodes);
  const BQuantities bq = b_quantities(track, model, p.n, c.get_double("se", "eps_n", 0.0));
  {
    auto os = open_out(out_dir(g) / "se_track.csv");
    write_se_csv(os, track, &bq);
  }
  const auto& last = track.points.back();
  std::printf("se: steps=%zu a=%.6g b=%.6g gamma=%.6g alpha=%.6g B=%.6g%s\n", track.points.size() - 1, last.a, last.b,
              last.gamma, last.alpha, bq.b.empty() ? 0.0 : bq.b.back(), track.halted ? " (halted)" : "");
  if (c.get_string("se", "fixed_point", "no") == "yes") {
    const int fp_nodes = static_cast<int>(c.get_int("se", "nodes", kFixedPointNodes));
    const FixedPoint fp = solve_fixed_point(model, p.mu_star.norm(), 0.5, 1e-12, 10000, fp_nodes);
    std::printf("fixed point: tau=%.17g delta=%.17g iterations=%d residual=%.3g\n", fp.tau, fp.delta, fp.iterations,
                fp.residual);
  }
  if (track.halted) {
    std::fprintf(stderr, "%s\n", track.report.c_str());
    return 3;
  }
  return 0;
}

int cmd_estimate(const Globals& g) {
  const Config c = load(g);
  const ModelSpec model = model_from(c);
  EstimatorConfig ec;
  ec.mu_star_norm = c.get_double("estimator", "signal_norm", 1.0);
  ec.eta = c.get_double("estimator", "eta", 0.1);
  ec.gamma0_hat = c.get_double("estimator", "gamma0", 1.0);
  ec.alpha0_hat = c.get_double("estimator", "alpha0", 0.0);
  const std::string backend = c.get_string("estimator", "backend", "quadrature");
  if (backend == "quadrature") ec.backend = ExpectationBackend::Quadrature;
  else if (backend == "mc") ec.backend = ExpectationBackend::MonteCarlo;
  else throw ConfigError("[estimator] backend must be quadrature or mc");
  ec.nodes = static_cast<int>(c.get_int("estimator", "nodes", kDefaultNodes));
  ec.draws = static_cast<int>(c.get_int("estimator", "draws", 1000));
  ec.seed = g.seed.value_or(0);
  const EstimatorTrack tr = estimator_run(ec, model, static_cast<int>(c.get_int("estimator", "t_max", 100)));
  {
    auto os = open_out(out_dir(g) / "estimator_track.csv");
    write_estimator_csv(os, tr);
  }
  for (const auto& w : tr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("estimate: corr_hat(T)=%.6f\n", tr.points.back().corr_hat);
  return 0;
}

int cmd_meanfield(const Globals& g) {
  const Config c = load(g);
  const std::uint64_t seed = g.seed.value_or(0);
  const ModelSpec model = model_from(c);
  const Problem p = problem_from(c, seed);
  MfConfig mc;
  mc.steps = StepSchedule(c.get_double("meanfield", "eta", 0.1));
  mc.phi = c.get_double("meanfield", "phi", 10.0);
  mc.t_max = static_cast<int>(c.get_int("meanfield", "t_max", 3));
  mc.mc_draws = static_cast<int>(c.get_int("meanfield", "mc_draws", 10000));
  mc.chunk = static_cast<int>(c.get_int("meanfield", "chunk", 4096));
  mc.seed = replication_seed(seed, 3);
  mc.threads = g.threads;
  const int pexp = static_cast<int>(c.get_int("meanfield", "p", 2));
  const MfTrack mf = mf_run(p.mu0, p.mu_star, model, mc);
  const SeTrack se = se_run(SeGeometry::from_vectors(p.mu0, p.mu_star), model, mc.steps, mc.t_max);
  const auto diags = mf_compare(mf, se, p.mu0, p.mu_star, pexp);
  {
    auto os = open_out(out_dir(g) / "mf_diagnostics.csv");
    write_mf_csv(os, diags);
  }
  for (const auto& n : mf.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
  const auto& d = diags.back();
  std::printf("meanfield: t=%d offdiag_tau=%.3g w_cov_max=%.3g omega_gap=%.3g\n", d.t, d.offdiag_tau, d.w_cov_max,
              d.omega_gap);
  return 0;
}

int cmd_experiment(const Globals& g, const std::string& id, const std::string& manifest_path) {
  harness::ExperimentConfig cfg;
  if (!manifest_path.empty()) {
    std::ifstream is(manifest_path);
    if (!is) throw ConfigError("cannot read manifest " + manifest_path);
    const harness::Manifest mf = harness::read_manifest_json(is);
    if (!id.empty() && id != mf.experiment) throw ConfigError("manifest is for experiment " + mf.experiment);
    cfg = harness::experiment_from_manifest(mf);
  } else {
    cfg = harness::experiment_from_config(harness::parse_experiment_kind(id), load(g));
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.threads = g.threads;
  const harness::ResultTable table = harness::run_experiment(cfg);
  const auto dir = out_dir(g);
  {
    auto os = open_out(dir / "results.csv");
    harness::write_table_csv(os, table);
  }
  {
    auto os = open_out(dir / "manifest.json");
    harness::write_manifest_json(os, table.manifest);
  }
  std::printf("experiment %s: %zu rows, config hash %s\n", table.manifest.experiment.c_str(), table.rows.size(),
              table.manifest.config_hash().c_str());
  return 0;
}

int cmd_export(const Globals& g, const std::string& table_path, const std::string& plot_id) {
  std::ifstream is(table_path);
  if (!is) throw ConfigError("cannot read table " + table_path);
  const auto rows = harness::read_table_csv(is);
  for (const auto& f : harness::emit_plotdata(rows, plot_id, g.out)) std::printf("%s\n", f.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient descent, state evolution and universality experiments"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Base seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");

  std::string design = "gaussian", dump;
  Index m = 100, n = 10;
  auto* sample = app.add_subcommand("sample", "Draw a design matrix and report its moments");
  sample->add_option("--design", design, "gaussian, rademacher, std_exponential");
  sample->add_option("-m", m, "Rows")->check(CLI::PositiveNumber);
  sample->add_option("-n", n, "Columns")->check(CLI::PositiveNumber);
  sample->add_option("--dump", dump, "Write the matrix as CSV under --out");

  auto* gd = app.add_subcommand("gd", "Run empirical gradient descent");
  auto* se = app.add_subcommand("se", "Run the state evolution");
  auto* est = app.add_subcommand("estimate", "Run the data-free correlation estimator");
  auto* mfc = app.add_subcommand("meanfield", "Run the mean-field recursion and compare with the state evolution");

  std::string exp_id, manifest;
  auto* exp = app.add_subcommand("experiment", "Run an experiment: fig1, fig2, conc or mf");
  exp->add_option("id", exp_id, "Experiment id")->check(CLI::IsMember({"fig1", "fig2", "conc", "mf"}));
  exp->add_option("--manifest", manifest, "Rerun the configuration recorded in a manifest");

  std::string table_path, plot_id;
  auto* exp_out = app.add_subcommand("export", "Reshape a result table into plot data");
  exp_out->add_option("--table", table_path, "results.csv from an experiment")->required();
  exp_out->add_option("--plot", plot_id, "fig1, fig2, conc or mf")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*sample) return cmd_sample(g, design, m, n, dump);
    if (*gd) return cmd_gd(g);
    if (*se) return cmd_se(g);
    if (*est) return cmd_estimate(g);
    if (*mfc) return cmd_meanfield(g);
    if (*exp) {
      if (exp_id.empty() && manifest.empty()) throw ConfigError("experiment needs an id or --manifest");
      return cmd_experiment(g, exp_id, manifest);
    }
    if (*exp_out) return cmd_export(g, table_path, plot_id);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  return 2;
}
