#pragma once

#include "gdse/harness/config.hpp"
#include "gdse/harness/table.hpp"
#include "gdse/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gdse::harness {

enum class ExperimentKind { Fig1PR, Fig2Corr, ConcSweep, MfSweep };

ExperimentKind parse_experiment_kind(std::string_view name);
std::string experiment_name(ExperimentKind kind);

/// Everything an experiment reads. Defaults depend on the kind; see
/// `default_experiment`. `threads` and `out_dir` do not affect results and
/// are kept out of the manifest.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Fig1PR;
  std::vector<std::string> designs;
  std::vector<Index> ns;
  Index m = 0;
  std::vector<double> phis;
  std::vector<std::string> links;
  std::vector<double> etas;          // one per link for Fig2, otherwise a single value
  int replications = 1;
  std::uint64_t seed = 0;
  int t_max = 0;
  int record_every = 1;
  double early_stop = 0.0;
  double corr_band_lo = 0.65;
  double corr_band_hi = 0.75;
  int max_init_attempts = 10000;
  double noise_sigma = 0.0;
  double gamma0_hat = 1.0;
  double alpha0_hat = 0.0;
  std::string estimator_backend = "quadrature";
  int estimator_draws = 1000;
  int mc_draws = 100000;
  int moment_p = 2;

  int threads = 1;
  std::string out_dir = ".";

  void validate() const;
  /// Resolved key/value view written into the manifest.
  Manifest manifest() const;
};

ExperimentConfig default_experiment(ExperimentKind kind);

/// Keys accepted in the [experiment] section.
const std::set<std::string>& experiment_keys();

/// Defaults for `kind` overridden by the [experiment] section of `cfg`.
ExperimentConfig experiment_from_config(ExperimentKind kind, const Config& cfg);

/// Rebuilds the configuration recorded in a manifest.
ExperimentConfig experiment_from_manifest(const Manifest& manifest);

ResultTable run_fig1(const ExperimentConfig& cfg);
ResultTable run_fig2(const ExperimentConfig& cfg);
ResultTable run_conc_sweep(const ExperimentConfig& cfg);
ResultTable run_mf_sweep(const ExperimentConfig& cfg);
ResultTable run_experiment(const ExperimentConfig& cfg);

/// Tidy per-panel CSVs plus `<plot_id>_plotdata.json`; returns written paths.
std::vector<std::string> emit_plotdata(const std::vector<ResultRow>& rows, const std::string& plot_id,
                                       const std::string& dir);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace gdse::harness
