#include "gdse/estimator.hpp"

#include <cstdio>
#include <ostream>
#include <random>

namespace gdse {

void EstimatorConfig::validate() const {
  if (!(mu_star_norm > 0.0)) throw ConfigError("estimator: |mu*| must be positive");
  if (!(eta >= 0.0)) throw ConfigError("estimator: step size must be nonnegative");
  if (!(cap > 0.0)) throw ConfigError("estimator: cap must be positive");
  if (!(gamma0_hat >= 0.0)) throw ConfigError("estimator: initial gamma must be nonnegative");
  if (std::abs(alpha0_hat) > gamma0_hat * mu_star_norm * (1.0 + 1e-12))
    throw ConfigError("estimator: |alpha0| must not exceed gamma0 |mu*|");
  if (backend == ExpectationBackend::Quadrature && nodes < 2) throw ConfigError("estimator: need >= 2 nodes");
  if (backend == ExpectationBackend::MonteCarlo && draws < 1) throw ConfigError("estimator: need >= 1 draw");
}

TauDelta estimator_tau_delta(double gamma_hat, double alpha_hat, const EstimatorConfig& cfg, const ModelSpec& model,
                             std::uint64_t step_index, bool* clipped) {
  const double s2 = cfg.mu_star_norm * cfg.mu_star_norm;
  GaussianPairCov cov{gamma_hat * gamma_hat, alpha_hat, s2};
  if (clipped) *clipped = !cov.psd();
  cov = cov.projected();
  // the estimator never sees the noise
  const ModelSpec clean = model.with_noise(NoiseSpec::zero());
  if (cfg.backend == ExpectationBackend::Quadrature) return tau_delta(clean, cov, cfg.nodes);

  std::mt19937_64 rng(replication_seed(cfg.seed, step_index));
  std::normal_distribution<double> nd;
  const double s = std::sqrt(cov.s2);
  const double a = s > 0.0 ? cov.alpha / s : 0.0;
  const double r = std::sqrt(std::max(0.0, cov.gamma2 - a * a));
  TauDelta td;
  for (int k = 0; k < cfg.draws; ++k) {
    const double z1 = nd(rng), z2 = nd(rng);
    const double g1 = a * z2 + r * z1, g2 = s * z2;
    td.tau += clean.score(Partial::D1, g1, g2, 0.0);
    td.delta -= clean.score(Partial::D2, g1, g2, 0.0);
  }
  td.tau /= cfg.draws;
  td.delta /= cfg.draws;
  return td;
}

EstimatorStep estimator_step(double gamma_hat, double alpha_hat, const EstimatorConfig& cfg, const ModelSpec& model,
                             std::uint64_t step_index) {
  EstimatorStep st;
  const TauDelta td = estimator_tau_delta(gamma_hat, alpha_hat, cfg, model, step_index, &st.clipped);
  const double s = cfg.mu_star_norm, eta = cfg.eta;
  const double keep = 1.0 - eta * td.tau;
  const double g2 = keep * keep * gamma_hat * gamma_hat + (eta * td.delta) * (eta * td.delta) * s * s +
                    2.0 * eta * td.delta * keep * alpha_hat;
  st.tau_hat = td.tau;
  st.delta_hat = td.delta;
  st.gamma_hat = std::min(std::sqrt(std::max(0.0, g2)), cfg.cap);
  st.alpha_hat = truncate(keep * alpha_hat + eta * td.delta * s * s, st.gamma_hat * s);
  if (!std::isfinite(st.gamma_hat) || !std::isfinite(st.alpha_hat)) throw NumericError("estimator produced non-finite state");
  return st;
}

EstimatorTrack estimator_run(const EstimatorConfig& cfg, const ModelSpec& model, int t_max) {
  cfg.validate();
  if (t_max < 0) throw ConfigError("t_max must be nonnegative");
  EstimatorTrack tr;
  const double s = cfg.mu_star_norm;
  double gamma = std::min(cfg.gamma0_hat, cfg.cap);
  double alpha = truncate(cfg.alpha0_hat, gamma * s);
  for (int t = 0; t <= t_max; ++t) {
    EstimatorPoint p;
    p.gamma_hat = gamma;
    p.alpha_hat = alpha;
    p.corr_hat = gamma > 0.0 ? alpha / (gamma * s) : 0.0;
    if (t == t_max) {
      const TauDelta td = estimator_tau_delta(gamma, alpha, cfg, model, static_cast<std::uint64_t>(t));
      p.tau_hat = td.tau;
      p.delta_hat = td.delta;
      tr.points.push_back(p);
      break;
    }
    const EstimatorStep st = estimator_step(gamma, alpha, cfg, model, static_cast<std::uint64_t>(t));
    if (st.clipped) tr.warnings.push_back("t=" + std::to_string(t) + ": covariance not PSD, correlation clipped");
    p.tau_hat = st.tau_hat;
    p.delta_hat = st.delta_hat;
    tr.points.push_back(p);
    gamma = st.gamma_hat;
    alpha = st.alpha_hat;
  }
  return tr;
}

void write_estimator_csv(std::ostream& os, const EstimatorTrack& track) {
  os << "t,tau_hat,delta_hat,gamma_hat,alpha_hat,corr_hat\n";
  char buf[512];
  for (std::size_t t = 0; t < track.points.size(); ++t) {
    const auto& p = track.points[t];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, p.tau_hat, p.delta_hat, p.gamma_hat,
                  p.alpha_hat, p.corr_hat);
    os << buf;
  }
}

double square_link_signal_norm(const Vector& y, double noise_mean) {
  if (y.size() == 0) throw ConfigError("method of moments needs responses");
  return std::sqrt(std::max(0.0, y.mean() - noise_mean));
}

} // namespace gdse
