#include "gdse/gd.hpp"
#include "gdse/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>

namespace gdse {

namespace {

GdTrajectory iterate(const DesignMatrix& x, const Vector& y, const ModelSpec& model, const GdConfig& cfg,
                     const GdTargets& targets, Index skip) {
  const Index m = x.rows(), n = x.cols();
  if (y.size() != m) throw ConfigError("response length does not match design rows");
  if (cfg.init.size() != n) throw ConfigError("initialisation length does not match design columns");
  if (cfg.t_max < 0) throw ConfigError("t_max must be nonnegative");
  if (cfg.record_every < 1) throw ConfigError("record_every must be positive");
  if (targets.mu_star.size() != 0 && targets.mu_star.size() != n) throw ConfigError("mu_star has wrong length");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool has_star = targets.mu_star.size() == n;
  const double star_norm = has_star ? targets.mu_star.norm() : nan;

  GdTrajectory tr;
  Vector mu = cfg.init;
  Vector xm(m), w(m);
  for (int t = 0;; ++t) {
    xm.noalias() = x.entries * mu;
    if (skip >= 0) xm(skip) = 0.0;

    const double norm = mu.norm();
    const double overlap = has_star ? mu.dot(targets.mu_star) : nan;
    double corr = nan;
    if (has_star) corr = norm > 0.0 && star_norm > 0.0 ? std::clamp(overlap / (norm * star_norm), -1.0, 1.0) : 0.0;
    const bool stop_early = cfg.early_stop_corr > 0.0 && has_star && std::abs(corr) > cfg.early_stop_corr;
    const bool last = t == cfg.t_max || stop_early;

    if (t % cfg.record_every == 0 || last) {
      GdRecord r;
      r.t = t;
      r.norm = norm;
      r.overlap = overlap;
      r.corr = corr;
      r.incoherence = xm.cwiseAbs().maxCoeff();
      if (t < static_cast<int>(targets.se_path.size())) r.conc_error = (mu - targets.se_path[t]).norm();
      tr.records.push_back(r);
      if (cfg.keep_iterates) tr.iterates.push_back(mu);
    }
    tr.last_t = t;
    if (last) break;

    for (Index i = 0; i < m; ++i) w(i) = model.loss_grad(xm(i), y(i));
    if (skip >= 0) w(skip) = 0.0;
    Vector next = mu - (cfg.steps(t) / static_cast<double>(m)) * (x.entries.transpose() * w);
    const double next_norm = next.norm();
    if (!std::isfinite(next_norm) || next_norm > cfg.divergence_cutoff) {
      tr.diverged = true;
      tr.report = "diverged at t=" + std::to_string(t + 1);
      break;
    }
    mu = std::move(next);
  }
  tr.final_iterate = mu;
  return tr;
}

} // namespace

Responses generate_response(const DesignMatrix& x, const Vector& mu_star, const ModelSpec& model, std::uint64_t seed) {
  if (mu_star.size() != x.cols()) throw ConfigError("mu_star has wrong length");
  Responses r;
  const Vector z = x.entries * mu_star;
  r.y.resize(x.rows());
  r.xi.resize(x.rows());
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < x.rows(); ++i) {
    r.xi(i) = model.noise().sample(rng);
    r.y(i) = model.response(z(i), r.xi(i));
  }
  return r;
}

GdTrajectory run_gd(const DesignMatrix& x, const Vector& y, const ModelSpec& model, const GdConfig& cfg,
                    const GdTargets& targets) {
  return iterate(x, y, model, cfg, targets, -1);
}

GdTrajectory leave_one_out(const DesignMatrix& x, Index i, const Vector& y, const ModelSpec& model,
                           const GdConfig& cfg, const GdTargets& targets) {
  if (i < 0 || i >= x.rows()) throw ConfigError("leave-one-out index out of range");
  return iterate(x, y, model, cfg, targets, i);
}

double incoherence(const DesignMatrix& x, const Vector& mu) { return (x.entries * mu).cwiseAbs().maxCoeff(); }

double oracle_corr(const Vector& mu, const Vector& mu_star) {
  const double d = mu.norm() * mu_star.norm();
  return d > 0.0 ? std::clamp(mu.dot(mu_star) / d, -1.0, 1.0) : 0.0;
}

Matrix empirical_M(const DesignMatrix& x, const Vector& y, const Vector& u, const Vector& v, const ModelSpec& model,
                   int u_nodes) {
  const Index m = x.rows(), n = x.cols();
  if (u.size() != n || v.size() != n) throw ConfigError("empirical_M: vector length mismatch");
  if (y.size() != m) throw ConfigError("empirical_M: response length mismatch");
  if (u_nodes < 1) throw ConfigError("empirical_M: need at least one U node");

  const Vector xu = x.entries * u;
  const Vector xv = x.entries * v;
  Vector weight = Vector::Zero(m);
  if (u == v) {
    for (Index i = 0; i < m; ++i) weight(i) = model.loss_hess(xu(i), y(i));
  } else {
    const QuadratureRule& q = gauss_legendre_unit(u_nodes);
    for (Index k = 0; k < q.nodes.size(); ++k) {
      const double uk = q.nodes(k);
      for (Index i = 0; i < m; ++i) weight(i) += q.weights(k) * model.loss_hess(uk * xu(i) + (1.0 - uk) * xv(i), y(i));
    }
  }
  Matrix out = x.entries.transpose() * (weight.asDiagonal() * x.entries);
  out /= static_cast<double>(m);
  return 0.5 * (out + out.transpose());
}

double gd_product_statistic(const DesignMatrix& x, const Vector& y, const ModelSpec& model,
                            const std::vector<Vector>& us, const std::vector<Vector>& vs, const StepSchedule& steps,
                            int u_nodes) {
  if (us.size() != vs.size()) throw ConfigError("iterate sequences differ in length");
  std::vector<Matrix> ms;
  std::vector<double> etas;
  for (std::size_t r = 0; r < us.size(); ++r) {
    ms.push_back(empirical_M(x, y, us[r], vs[r], model, u_nodes));
    etas.push_back(steps(static_cast<Index>(r)));
  }
  return product_norm_diag(ms, etas);
}

void write_trajectory_csv(std::ostream& os, const GdTrajectory& tr) {
  os << "t,norm,overlap,corr,incoherence,conc_error\n";
  char buf[512];
  for (const auto& r : tr.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.norm, r.overlap, r.corr,
                  r.incoherence, r.conc_error);
    os << buf;
  }
}

void write_iterates_binary(std::ostream& os, const GdTrajectory& tr) {
  const std::int64_t count = static_cast<std::int64_t>(tr.iterates.size());
  const std::int64_t n = count > 0 ? static_cast<std::int64_t>(tr.iterates.front().size()) : 0;
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& v : tr.iterates) os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

} // namespace gdse
