#include "gdse/harness/experiments.hpp"

#include "gdse/design.hpp"
#include "gdse/estimator.hpp"
#include "gdse/gd.hpp"
#include "gdse/meanfield.hpp"
#include "gdse/model.hpp"
#include "gdse/parallel.hpp"
#include "gdse/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gdse::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double d : v) s.push_back(format_double(d));
  return join(s);
}

std::string join(const std::vector<Index>& v) {
  std::vector<std::string> s;
  for (Index d : v) s.push_back(std::to_string(d));
  return join(s);
}

/// Independent stream per experiment cell; replications then branch off
/// with replication_seed.
std::uint64_t cell_seed(std::uint64_t base, const std::string& tag) { return base ^ fnv1a(tag); }

Vector flat_signal(Index n) { return Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))); }

Vector gaussian_init(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Index rows_for(double phi, Index n) { return static_cast<Index>(std::llround(phi * static_cast<double>(n))); }

/// max_t incoherence_t / (sqrt(2 log m) (1 + max_{s<=t} |mu_s|)).
double incoherence_ratio(const GdTrajectory& tr, Index m) {
  const double scale = std::sqrt(2.0 * std::log(static_cast<double>(m)));
  double run_max = 0.0, ratio = 0.0;
  for (const auto& r : tr.records) {
    run_max = std::max(run_max, r.norm);
    ratio = std::max(ratio, r.incoherence / (scale * (1.0 + run_max)));
  }
  return ratio;
}

/// Value at every t in [0, t_max]; past the last record the final value is
/// carried forward (converged or diverged runs stop early).
std::vector<double> dense_series(const GdTrajectory& tr, int t_max, double GdRecord::*field) {
  std::vector<double> out(static_cast<std::size_t>(t_max) + 1, kNaN);
  double last = kNaN;
  std::size_t k = 0;
  for (int t = 0; t <= t_max; ++t) {
    while (k < tr.records.size() && tr.records[k].t <= t) last = tr.records[k++].*field;
    out[static_cast<std::size_t>(t)] = last;
  }
  return out;
}

ModelSpec build_model(const std::string& link, double sigma) {
  NoiseSpec noise = sigma > 0.0 ? NoiseSpec::gaussian(sigma) : NoiseSpec::zero();
  return ModelSpec::squared_on_link(parse_link(link), noise);
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "fig1") return ExperimentKind::Fig1PR;
  if (name == "fig2") return ExperimentKind::Fig2Corr;
  if (name == "conc") return ExperimentKind::ConcSweep;
  if (name == "mf") return ExperimentKind::MfSweep;
  throw ConfigError("unknown experiment '" + std::string(name) + "' (expected fig1, fig2, conc or mf)");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::Fig1PR: return "fig1";
  case ExperimentKind::Fig2Corr: return "fig2";
  case ExperimentKind::ConcSweep: return "conc";
  case ExperimentKind::MfSweep: return "mf";
  }
  return "?";
}

ExperimentConfig default_experiment(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.seed = 20240601;
  switch (kind) {
  case ExperimentKind::Fig1PR:
    c.designs = {"gaussian", "rademacher", "std_exponential"};
    c.ns = {50, 100, 150};
    c.m = 3000;
    c.links = {"square"};
    c.etas = {0.1};
    c.replications = 50;
    c.t_max = 500;
    c.early_stop = 0.999;
    break;
  case ExperimentKind::Fig2Corr:
    c.designs = {"gaussian", "rademacher", "std_exponential"};
    c.ns = {300};
    c.m = 10000;
    c.links = {"sigmoid", "x_plus_sin", "quad_plus_linear"};
    c.etas = {0.5, 0.01, 0.005};
    c.replications = 100;
    c.t_max = 300;
    break;
  case ExperimentKind::ConcSweep:
    c.designs = {"gaussian"};
    c.ns = {50};
    c.phis = {50, 200, 800};
    c.links = {"identity"};
    c.etas = {0.1};
    c.replications = 20;
    c.t_max = 20;
    c.noise_sigma = 0.5;
    break;
  case ExperimentKind::MfSweep:
    c.designs = {"gaussian"};
    c.ns = {50};
    c.phis = {10, 100, 1000};
    c.links = {"identity"};
    c.etas = {0.1};
    c.replications = 1;
    c.t_max = 3;
    c.mc_draws = 100000;
    break;
  }
  return c;
}

const std::set<std::string>& experiment_keys() {
  static const std::set<std::string> keys = {
      "designs", "n", "m", "phi", "links", "eta", "replications", "seed", "t_max", "record_every",
      "early_stop", "corr_band_lo", "corr_band_hi", "max_init_attempts", "noise_sigma", "gamma0_hat",
      "alpha0_hat", "estimator_backend", "estimator_draws", "mc_draws", "p"};
  return keys;
}

ExperimentConfig experiment_from_config(ExperimentKind kind, const Config& cfg) {
  ExperimentConfig c = default_experiment(kind);
  const std::string s = "experiment";
  c.designs = cfg.get_list(s, "designs", c.designs);
  if (cfg.has(s, "n")) {
    c.ns.clear();
    for (double v : cfg.get_double_list(s, "n", {})) {
      if (v != std::floor(v)) throw ConfigError("[experiment] n: expected integers");
      c.ns.push_back(static_cast<Index>(v));
    }
  }
  c.m = cfg.get_int(s, "m", c.m);
  c.phis = cfg.get_double_list(s, "phi", c.phis);
  c.links = cfg.get_list(s, "links", c.links);
  c.etas = cfg.get_double_list(s, "eta", c.etas);
  c.replications = static_cast<int>(cfg.get_int(s, "replications", c.replications));
  c.seed = cfg.get_u64(s, "seed", c.seed);
  c.t_max = static_cast<int>(cfg.get_int(s, "t_max", c.t_max));
  c.record_every = static_cast<int>(cfg.get_int(s, "record_every", c.record_every));
  c.early_stop = cfg.get_double(s, "early_stop", c.early_stop);
  c.corr_band_lo = cfg.get_double(s, "corr_band_lo", c.corr_band_lo);
  c.corr_band_hi = cfg.get_double(s, "corr_band_hi", c.corr_band_hi);
  c.max_init_attempts = static_cast<int>(cfg.get_int(s, "max_init_attempts", c.max_init_attempts));
  c.noise_sigma = cfg.get_double(s, "noise_sigma", c.noise_sigma);
  c.gamma0_hat = cfg.get_double(s, "gamma0_hat", c.gamma0_hat);
  c.alpha0_hat = cfg.get_double(s, "alpha0_hat", c.alpha0_hat);
  c.estimator_backend = cfg.get_string(s, "estimator_backend", c.estimator_backend);
  c.estimator_draws = static_cast<int>(cfg.get_int(s, "estimator_draws", c.estimator_draws));
  c.mc_draws = static_cast<int>(cfg.get_int(s, "mc_draws", c.mc_draws));
  c.moment_p = static_cast<int>(cfg.get_int(s, "p", c.moment_p));
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (designs.empty()) throw ConfigError("experiment needs at least one design");
  for (const auto& d : designs) parse_design_kind(d);
  if (ns.empty()) throw ConfigError("experiment needs at least one n");
  for (Index n : ns)
    if (n < 1) throw ConfigError("n must be positive");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (t_max < 0) throw ConfigError("t_max must be nonnegative");
  if (record_every < 1) throw ConfigError("record_every must be positive");
  if (links.empty()) throw ConfigError("experiment needs a link");
  for (const auto& l : links) parse_link(l);
  if (etas.empty()) throw ConfigError("experiment needs a step size");
  for (double e : etas)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("step sizes must be finite and nonnegative");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
  switch (kind) {
  case ExperimentKind::Fig1PR:
    if (m < 1) throw ConfigError("m must be positive");
    if (!(corr_band_lo < corr_band_hi)) throw ConfigError("empty initial-correlation band");
    if (max_init_attempts < 1) throw ConfigError("max_init_attempts must be positive");
    if (links.size() != 1 || etas.size() != 1) throw ConfigError("fig1 takes a single link and step size");
    break;
  case ExperimentKind::Fig2Corr:
    if (m < 1) throw ConfigError("m must be positive");
    if (etas.size() != links.size()) throw ConfigError("fig2 needs one step size per link");
    if (estimator_backend != "quadrature" && estimator_backend != "mc")
      throw ConfigError("estimator_backend must be quadrature or mc");
    if (estimator_draws < 1) throw ConfigError("estimator_draws must be positive");
    break;
  case ExperimentKind::ConcSweep:
  case ExperimentKind::MfSweep:
    if (phis.empty()) throw ConfigError("sweep needs a phi grid");
    for (double p : phis)
      if (!(p > 0.0)) throw ConfigError("phi values must be positive");
    if (links.size() != 1 || etas.size() != 1) throw ConfigError("sweeps take a single link and step size");
    if (kind == ExperimentKind::MfSweep) {
      if (mc_draws < 1000) throw ConfigError("mc_draws must be at least 1000");
      if (moment_p < 2 || moment_p % 2) throw ConfigError("p must be even and >= 2");
    }
    break;
  }
}

Manifest ExperimentConfig::manifest() const {
  Manifest mf;
  mf.experiment = experiment_name(kind);
  mf.base_seed = seed;
  auto& c = mf.config;
  c["designs"] = join(designs);
  c["n"] = join(ns);
  c["links"] = join(links);
  c["eta"] = join(etas);
  c["replications"] = std::to_string(replications);
  c["seed"] = std::to_string(seed);
  c["t_max"] = std::to_string(t_max);
  c["record_every"] = std::to_string(record_every);
  c["noise_sigma"] = format_double(noise_sigma);
  switch (kind) {
  case ExperimentKind::Fig1PR:
    c["m"] = std::to_string(m);
    c["early_stop"] = format_double(early_stop);
    c["corr_band_lo"] = format_double(corr_band_lo);
    c["corr_band_hi"] = format_double(corr_band_hi);
    c["max_init_attempts"] = std::to_string(max_init_attempts);
    break;
  case ExperimentKind::Fig2Corr:
    c["m"] = std::to_string(m);
    c["early_stop"] = format_double(early_stop);
    c["gamma0_hat"] = format_double(gamma0_hat);
    c["alpha0_hat"] = format_double(alpha0_hat);
    c["estimator_backend"] = estimator_backend;
    c["estimator_draws"] = std::to_string(estimator_draws);
    for (const auto& l : links)
      if (l == "quad_plus_linear")
        mf.notes.push_back("quad_plus_linear has unbounded derivative; the monotone-link convergence guarantee does not "
                           "cover it and the run is exploratory");
    break;
  case ExperimentKind::ConcSweep:
    c["phi"] = join(phis);
    break;
  case ExperimentKind::MfSweep:
    c["phi"] = join(phis);
    c["mc_draws"] = std::to_string(mc_draws);
    c["p"] = std::to_string(moment_p);
    break;
  }
  return mf;
}

ExperimentConfig experiment_from_manifest(const Manifest& manifest) {
  Config cfg;
  for (const auto& [k, v] : manifest.config) {
    if (!experiment_keys().count(k)) throw ConfigError("manifest: unknown config key " + k);
    cfg.set("experiment", k, v);
  }
  return experiment_from_config(parse_experiment_kind(manifest.experiment), cfg);
}

ResultTable run_fig1(const ExperimentConfig& cfg) {
  cfg.validate();
  ResultTable table;
  table.manifest = cfg.manifest();
  const ModelSpec model = build_model(cfg.links.front(), cfg.noise_sigma);
  const double eta = cfg.etas.front();

  struct Job {
    DesignKind kind;
    Index n;
    int r;
  };
  struct Outcome {
    std::vector<double> abs_corr;
    GdTrajectory tr;
    double init_corr = 0.0;
    int attempts = 0;
    double incoherence_ratio = 0.0;
  };

  for (Index n : cfg.ns) {
    const Vector mu_star = flat_signal(n);
    for (const auto& dname : cfg.designs) {
      const DesignKind kind = parse_design_kind(dname);
      std::vector<Outcome> out(static_cast<std::size_t>(cfg.replications));
      parallel_for(cfg.replications, cfg.threads, [&](int r) {
        Outcome& o = out[static_cast<std::size_t>(r)];
        // the initialisation depends on (n, r) only, so designs share it
        std::mt19937_64 rng(replication_seed(cell_seed(cfg.seed, "init:" + std::to_string(n)), r));
        Vector mu0;
        const double sn = std::sqrt(static_cast<double>(n));
        for (;;) {
          if (++o.attempts > cfg.max_init_attempts)
            throw NumericError("fig1: no initialisation in the correlation band after " +
                               std::to_string(cfg.max_init_attempts) + " attempts");
          mu0 = gaussian_init(n, rng);
          o.init_corr = sn * mu0.dot(mu_star) / mu0.norm();
          if (o.init_corr >= cfg.corr_band_lo && o.init_corr <= cfg.corr_band_hi) break;
        }
        const std::uint64_t ds = replication_seed(cell_seed(cfg.seed, dname + ":" + std::to_string(n)), r);
        const DesignMatrix x = sample_design(kind, cfg.m, n, ds);
        const Responses resp = generate_response(x, mu_star, model, ds + 1);
        GdConfig gc;
        gc.steps = StepSchedule(eta);
        gc.t_max = cfg.t_max;
        gc.init = mu0;
        gc.early_stop_corr = cfg.early_stop;
        gc.keep_iterates = false;
        o.tr = run_gd(x, resp.y, model, gc, {mu_star, {}});
        o.abs_corr = dense_series(o.tr, cfg.t_max, &GdRecord::corr);
        for (double& v : o.abs_corr) v = std::abs(v);
        o.incoherence_ratio = incoherence_ratio(o.tr, cfg.m);
      });

      const std::string exp = "fig1";
      for (int r = 0; r < cfg.replications; ++r) {
        const Outcome& o = out[static_cast<std::size_t>(r)];
        auto row = [&](int t, const std::string& metric, double v) {
          table.add({exp, dname, cfg.m, n, eta, r, t, metric, v});
        };
        row(0, "init_scaled_corr", o.init_corr);
        row(-1, "init_attempts", o.attempts);
        row(-1, "last_t", o.tr.last_t);
        row(-1, "diverged", o.tr.diverged ? 1.0 : 0.0);
        row(-1, "incoherence_ratio", o.incoherence_ratio);
        for (const auto& rec : o.tr.records)
          if (rec.t % cfg.record_every == 0 || rec.t == o.tr.last_t) row(rec.t, "abs_corr", std::abs(rec.corr));
      }
      for (int t = 0; t <= cfg.t_max; ++t) {
        double s = 0.0;
        for (const auto& o : out) s += o.abs_corr[static_cast<std::size_t>(t)];
        table.add({exp, dname, cfg.m, n, eta, -1, t, "mean_abs_corr", s / cfg.replications});
      }
    }
  }
  return table;
}

ResultTable run_fig2(const ExperimentConfig& cfg) {
  cfg.validate();
  ResultTable table;
  table.manifest = cfg.manifest();

  for (std::size_t li = 0; li < cfg.links.size(); ++li) {
    const std::string& link = cfg.links[li];
    const double eta = cfg.etas[li];
    const ModelSpec model = build_model(link, cfg.noise_sigma);
    const std::string exp = "fig2/" + link;

    for (Index n : cfg.ns) {
      const Vector mu_star = flat_signal(n);

      EstimatorConfig ec;
      ec.mu_star_norm = mu_star.norm();
      ec.eta = eta;
      ec.gamma0_hat = cfg.gamma0_hat;
      ec.alpha0_hat = cfg.alpha0_hat;
      ec.backend = cfg.estimator_backend == "mc" ? ExpectationBackend::MonteCarlo : ExpectationBackend::Quadrature;
      ec.draws = cfg.estimator_draws;
      ec.seed = cell_seed(cfg.seed, "estimator:" + link);
      const EstimatorTrack est = estimator_run(ec, model, cfg.t_max);
      for (const auto& w : est.warnings) table.manifest.notes.push_back(exp + ": " + w);
      for (int t = 0; t <= cfg.t_max; ++t)
        table.add({exp, "estimator", cfg.m, n, eta, -1, t, "corr_hat", est.points[static_cast<std::size_t>(t)].corr_hat});

      for (const auto& dname : cfg.designs) {
        const DesignKind kind = parse_design_kind(dname);
        std::vector<GdTrajectory> out(static_cast<std::size_t>(cfg.replications));
        parallel_for(cfg.replications, cfg.threads, [&](int r) {
          std::mt19937_64 rng(replication_seed(cell_seed(cfg.seed, "init:" + std::to_string(n)), r));
          const Vector mu0 = gaussian_init(n, rng);
          const std::uint64_t ds = replication_seed(cell_seed(cfg.seed, dname + ":" + std::to_string(n)), r);
          const DesignMatrix x = sample_design(kind, cfg.m, n, ds);
          const Responses resp = generate_response(x, mu_star, model, ds + 1);
          GdConfig gc;
          gc.steps = StepSchedule(eta);
          gc.t_max = cfg.t_max;
          gc.init = mu0;
          gc.early_stop_corr = cfg.early_stop;
          gc.keep_iterates = false;
          out[static_cast<std::size_t>(r)] = run_gd(x, resp.y, model, gc, {mu_star, {}});
        });

        std::vector<double> mean(static_cast<std::size_t>(cfg.t_max) + 1, 0.0);
        for (int r = 0; r < cfg.replications; ++r) {
          const GdTrajectory& tr = out[static_cast<std::size_t>(r)];
          table.add({exp, dname, cfg.m, n, eta, r, -1, "diverged", tr.diverged ? 1.0 : 0.0});
          for (const auto& rec : tr.records)
            if (rec.t % cfg.record_every == 0 || rec.t == tr.last_t)
              table.add({exp, dname, cfg.m, n, eta, r, rec.t, "corr", rec.corr});
          const auto dense = dense_series(tr, cfg.t_max, &GdRecord::corr);
          for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += dense[t] / cfg.replications;
        }
        double gap = 0.0;
        for (int t = 0; t <= cfg.t_max; ++t) {
          const double v = mean[static_cast<std::size_t>(t)];
          table.add({exp, dname, cfg.m, n, eta, -1, t, "mean_corr", v});
          gap = std::max(gap, std::abs(v - est.points[static_cast<std::size_t>(t)].corr_hat));
        }
        table.add({exp, dname, cfg.m, n, eta, -1, -1, "sup_gap", gap});
      }
    }
  }
  return table;
}

ResultTable run_conc_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ResultTable table;
  table.manifest = cfg.manifest();
  const ModelSpec model = build_model(cfg.links.front(), cfg.noise_sigma);
  const double eta = cfg.etas.front();
  const std::string exp = "conc";

  struct Outcome {
    std::vector<double> conc, incoh;
    double ratio = 0.0;
    bool diverged = false;
  };

  for (Index n : cfg.ns) {
    const Vector mu_star = flat_signal(n);
    for (const auto& dname : cfg.designs) {
      const DesignKind kind = parse_design_kind(dname);
      std::vector<double> final_medians;
      for (double phi : cfg.phis) {
        const Index m = rows_for(phi, n);
        std::vector<Outcome> out(static_cast<std::size_t>(cfg.replications));
        parallel_for(cfg.replications, cfg.threads, [&](int r) {
          Outcome& o = out[static_cast<std::size_t>(r)];
          std::mt19937_64 rng(replication_seed(cell_seed(cfg.seed, "init:" + std::to_string(n)), r));
          const Vector mu0 = gaussian_init(n, rng);
          const SeTrack se = se_run(SeGeometry::from_vectors(mu0, mu_star), model, StepSchedule(eta), cfg.t_max);
          const std::uint64_t ds =
              replication_seed(cell_seed(cfg.seed, dname + ":" + std::to_string(n) + ":" + format_double(phi)), r);
          const DesignMatrix x = sample_design(kind, m, n, ds);
          const Responses resp = generate_response(x, mu_star, model, ds + 1);
          GdConfig gc;
          gc.steps = StepSchedule(eta);
          gc.t_max = cfg.t_max;
          gc.init = mu0;
          gc.keep_iterates = false;
          const GdTrajectory tr = run_gd(x, resp.y, model, gc, {mu_star, se.path(mu0, mu_star)});
          o.conc = dense_series(tr, cfg.t_max, &GdRecord::conc_error);
          o.incoh = dense_series(tr, cfg.t_max, &GdRecord::incoherence);
          o.ratio = incoherence_ratio(tr, m);
          o.diverged = tr.diverged;
        });

        for (int r = 0; r < cfg.replications; ++r) {
          const Outcome& o = out[static_cast<std::size_t>(r)];
          table.add({exp, dname, m, n, eta, r, -1, "diverged", o.diverged ? 1.0 : 0.0});
          table.add({exp, dname, m, n, eta, r, -1, "incoherence_ratio", o.ratio});
          for (int t = 0; t <= cfg.t_max; t += 1)
            if (t % cfg.record_every == 0 || t == cfg.t_max)
              table.add({exp, dname, m, n, eta, r, t, "conc_error", o.conc[static_cast<std::size_t>(t)]});
        }
        for (int t = 0; t <= cfg.t_max; ++t) {
          std::vector<double> errs;
          double incoh = 0.0;
          for (const auto& o : out) {
            errs.push_back(o.conc[static_cast<std::size_t>(t)]);
            incoh = std::max(incoh, o.incoh[static_cast<std::size_t>(t)]);
          }
          const double med = median(errs);
          table.add({exp, dname, m, n, eta, -1, t, "median_conc_error", med});
          table.add({exp, dname, m, n, eta, -1, t, "max_incoherence", incoh});
          if (t == cfg.t_max) final_medians.push_back(med);
        }
      }
      if (cfg.phis.size() >= 2)
        table.add({exp, dname, 0, n, eta, -1, cfg.t_max, "loglog_slope", loglog_slope(cfg.phis, final_medians)});
    }
  }
  return table;
}

ResultTable run_mf_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ResultTable table;
  table.manifest = cfg.manifest();
  const ModelSpec model = build_model(cfg.links.front(), cfg.noise_sigma);
  const double eta = cfg.etas.front();
  const std::string exp = "mf";

  for (Index n : cfg.ns) {
    const Vector mu_star = flat_signal(n);
    std::mt19937_64 rng(cell_seed(cfg.seed, "init:" + std::to_string(n)));
    const Vector mu0 = gaussian_init(n, rng);
    const SeTrack se = se_run(SeGeometry::from_vectors(mu0, mu_star), model, StepSchedule(eta), cfg.t_max);
    for (double phi : cfg.phis) {
      MfConfig mc;
      mc.steps = StepSchedule(eta);
      mc.phi = phi;
      mc.t_max = cfg.t_max;
      mc.mc_draws = cfg.mc_draws;
      mc.seed = cell_seed(cfg.seed, "mf:" + std::to_string(n) + ":" + format_double(phi));
      mc.threads = cfg.threads;
      const MfTrack mf = mf_run(mu0, mu_star, model, mc);
      for (const auto& note : mf.notes) table.manifest.notes.push_back(note);
      const Index m = rows_for(phi, n);
      for (const auto& d : mf_compare(mf, se, mu0, mu_star, cfg.moment_p)) {
        table.add({exp, "meanfield", m, n, eta, -1, d.t, "offdiag_tau", d.offdiag_tau});
        table.add({exp, "meanfield", m, n, eta, -1, d.t, "w_cov_max", d.w_cov_max});
        table.add({exp, "meanfield", m, n, eta, -1, d.t, "omega_gap", d.omega_gap});
      }
    }
  }
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
  case ExperimentKind::Fig1PR: return run_fig1(cfg);
  case ExperimentKind::Fig2Corr: return run_fig2(cfg);
  case ExperimentKind::ConcSweep: return run_conc_sweep(cfg);
  case ExperimentKind::MfSweep: return run_mf_sweep(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("loglog_slope needs two or more matched points");
  double mx = 0.0, my = 0.0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericError("loglog_slope needs positive values");
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw NumericError("loglog_slope: all x equal");
  return sxy / sxx;
}

} // namespace gdse::harness
