#pragma once

#include "gdse/model.hpp"
#include "gdse/types.hpp"

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace gdse {

enum class ExpectationBackend { Quadrature, MonteCarlo };

struct EstimatorConfig {
  double mu_star_norm = 1.0;
  double eta = 0.1;
  double gamma0_hat = 1.0;
  double alpha0_hat = 0.0;
  double cap = std::exp(100.0);
  ExpectationBackend backend = ExpectationBackend::Quadrature;
  int nodes = kDefaultNodes;
  int draws = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EstimatorPoint {
  double tau_hat = 0.0;    // evaluated at this point, drives the next step
  double delta_hat = 0.0;
  double gamma_hat = 0.0;
  double alpha_hat = 0.0;
  double corr_hat = 0.0;
};

struct EstimatorStep {
  double tau_hat = 0.0;
  double delta_hat = 0.0;
  double gamma_hat = 0.0;
  double alpha_hat = 0.0;
  bool clipped = false;
};

struct EstimatorTrack {
  std::vector<EstimatorPoint> points;
  std::vector<std::string> warnings;
};

/// T_M(x) = (x ^ M) v (-M).
inline double truncate(double x, double bound) { return std::max(-bound, std::min(x, bound)); }

/// Noise-free (tau, delta) under N(0, [[gamma^2, alpha], [alpha, |mu*|^2]]).
TauDelta estimator_tau_delta(double gamma_hat, double alpha_hat, const EstimatorConfig& cfg, const ModelSpec& model,
                             std::uint64_t step_index, bool* clipped = nullptr);

EstimatorStep estimator_step(double gamma_hat, double alpha_hat, const EstimatorConfig& cfg, const ModelSpec& model,
                             std::uint64_t step_index = 0);

EstimatorTrack estimator_run(const EstimatorConfig& cfg, const ModelSpec& model, int t_max);

void write_estimator_csv(std::ostream& os, const EstimatorTrack& track);

/// Method-of-moments |mu*| for the square link: E Y = |mu*|^2 + E xi.
double square_link_signal_norm(const Vector& y, double noise_mean = 0.0);

} // namespace gdse
