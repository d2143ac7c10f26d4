#include "gdse/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace gdse {

namespace {

double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

bool is_square_link(const ModelSpec& model) {
  return model.loss() == LossKind::SquaredOnLink && model.link()->name == "square";
}

} // namespace

SeGeometry SeGeometry::from_vectors(const Vector& mu0, const Vector& mu_star) {
  if (mu0.size() != mu_star.size()) throw ConfigError("mu0 and mu* differ in length");
  return {mu0.squaredNorm(), mu0.dot(mu_star), mu_star.squaredNorm()};
}

std::vector<Vector> SeTrack::path(const Vector& mu0, const Vector& mu_star) const {
  std::vector<Vector> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.a * mu0 + p.b * mu_star);
  return out;
}

SeTrack se_run(const SeGeometry& g, const ModelSpec& model, const StepSchedule& steps, int t_max, int nodes) {
  if (!(g.signal_norm2 > 0.0)) throw ConfigError("state evolution needs a nonzero signal");
  if (t_max < 0) throw ConfigError("t_max must be nonnegative");
  SeTrack tr;
  tr.geometry = g;
  tr.steps = steps;
  double a = 1.0, b = 0.0;
  for (int t = 0; t <= t_max; ++t) {
    SePoint p;
    p.a = a;
    p.b = b;
    const double g2 = a * a * g.init_norm2 + 2.0 * a * b * g.cross + b * b * g.signal_norm2;
    p.gamma = std::sqrt(std::max(0.0, g2));
    p.alpha = a * g.cross + b * g.signal_norm2;
    try {
      const TauDelta td = tau_delta(model, p.cov(g.signal_norm2), nodes);
      p.tau = td.tau;
      p.delta = td.delta;
    } catch (const NumericError& e) {
      tr.halted = true;
      tr.report = "halted at t=" + std::to_string(t) + ": " + e.what();
      break;
    }
    tr.points.push_back(p);
    if (t == t_max) break;
    const double eta = steps(t);
    a = (1.0 - eta * p.tau) * a;
    b = (1.0 - eta * p.tau) * b + eta * p.delta;
    if (!std::isfinite(a) || !std::isfinite(b)) {
      tr.halted = true;
      tr.report = "non-finite state at t=" + std::to_string(t + 1);
      break;
    }
  }
  return tr;
}

TheoreticalGdTrack theoretical_gd_mc(const DesignKind& kind, const ModelSpec& model, const Vector& mu0,
                                     const Vector& mu_star, const StepSchedule& steps, int t_max, int mc_reps,
                                     std::uint64_t seed) {
  if (mc_reps < 1) throw ConfigError("mc_reps must be positive");
  if (mu0.size() != mu_star.size()) throw ConfigError("mu0 and mu* differ in length");
  const Index n = mu0.size();
  TheoreticalGdTrack tr;
  Vector u = mu0;
  Matrix cov = Matrix::Zero(n, n);
  tr.u.push_back(u);
  tr.cov.push_back(cov);
  tr.std_error.push_back(0.0);

  RowMatrix rows(mc_reps, n);
  Vector grads(n), xi(mc_reps);
  for (int t = 0; t < t_max; ++t) {
    std::mt19937_64 rng(replication_seed(seed, static_cast<std::uint64_t>(t)));
    draw_entries(kind, rng, rows.data(), rows.size());
    for (int k = 0; k < mc_reps; ++k) xi(k) = model.noise().sample(rng);
    const Vector xu = rows * u;
    const Vector xs = rows * mu_star;
    Vector s(mc_reps), d(mc_reps);
    for (int k = 0; k < mc_reps; ++k) {
      s(k) = model.score(Partial::S, xu(k), xs(k), xi(k));
      d(k) = model.score(Partial::D1, xu(k), xs(k), xi(k));
    }
    const double r = static_cast<double>(mc_reps);
    const Vector mean = rows.transpose() * s / r;
    // sample covariance of the per-row gradients x_k s_k
    RowMatrix centered = s.asDiagonal() * rows;
    centered.rowwise() -= mean.transpose();
    const Matrix grad_cov = mc_reps > 1 ? Matrix(centered.transpose() * centered / (r - 1.0)) : Matrix::Zero(n, n);
    Matrix jac = -(steps(t) / r) * (rows.transpose() * (d.asDiagonal() * rows));
    jac.diagonal().array() += 1.0;

    const double eta = steps(t);
    u -= eta * mean;
    cov = jac * cov * jac.transpose() + (eta * eta / r) * grad_cov;
    tr.u.push_back(u);
    tr.cov.push_back(cov);
    tr.std_error.push_back(std::sqrt(std::max(0.0, cov.trace())));
  }
  return tr;
}

PrState pr_step(const PrState& s) {
  const double r2 = s.alpha * s.alpha + s.beta * s.beta;
  PrState n = s;
  n.alpha = (1.0 - 6.0 * s.eta * (r2 - 1.0) + 2.0 * s.eta * s.noise_mean) * s.alpha;
  n.beta = std::abs((1.0 - 6.0 * s.eta * (r2 - 1.0 / 3.0) + 2.0 * s.eta * s.noise_mean) * s.beta);
  return n;
}

std::vector<PrState> pr_run(const PrState& s0, int t_max) {
  std::vector<PrState> out{s0};
  for (int t = 0; t < t_max; ++t) out.push_back(pr_step(out.back()));
  return out;
}

double StageParams::signal_threshold() const {
  if (!(m > 1.0)) throw ConfigError("stage detection needs m > 1");
  if (!(c0 > 0.0)) throw ConfigError("stage constant c0 must be positive");
  return 1.0 / (c0 * std::pow(std::log(m), 5));
}

StageTimes pr_stage_times(const std::vector<PrState>& track, const StageParams& params) {
  StageTimes st;
  if (track.empty()) return st;
  const double thr = params.signal_threshold();
  const double a0 = track.front().alpha;
  const double sgn = a0 > 0.0 ? 1.0 : (a0 < 0.0 ? -1.0 : 0.0);
  const double target = 1.0 / std::sqrt(3.0);
  for (std::size_t t = 0; t < track.size(); ++t) {
    const auto& s = track[t];
    if (st.stage1_end < 0 && std::abs(s.beta - target) <= params.beta_tol) st.stage1_end = static_cast<int>(t);
    if (st.t0 < 0 && t + 1 < track.size() && sgn != 0.0 && track[t + 1].alpha * sgn >= thr)
      st.t0 = static_cast<int>(t);
    const double a = sgn != 0.0 ? s.alpha * sgn : std::abs(s.alpha);
    if (st.t_eps < 0 && std::max(std::abs(a - 1.0), s.beta) <= params.eps0 / 4.0) st.t_eps = static_cast<int>(t);
  }
  std::ostringstream os;
  auto show = [](int v) { return v < 0 ? std::string("not reached") : std::to_string(v); };
  os << "stage 1 (orthogonal part settles near 1/sqrt(3)): t < " << show(st.stage1_end)
     << "; stage 2 (signal growth below " << thr << "): until T0 = " << show(st.t0)
     << "; stage 3 (local convergence): T_eps = " << show(st.t_eps);
  st.summary = os.str();
  return st;
}

Rank2Coeffs mz_coefficients(const ModelSpec& model, const GaussianPairCov& cov_in, MzMode mode, int u_nodes,
                            int nodes) {
  const GaussianPairCov cov = cov_in.projected();
  const double g2 = cov.gamma2, al = cov.alpha, s2 = cov.s2;
  const NoiseSpec& noise = model.noise();
  const bool affine = model.affine_in_noise();

  if (is_square_link(model)) {
    const double nu = noise.mean;
    if (mode == MzMode::Self) return {2.0 * (3.0 * g2 - s2) - 2.0 * nu, 12.0, 0.0, -4.0};
    return {2.0 * g2 + 2.0 * al - 2.0 * nu, 4.0, 2.0, 0.0};
  }

  auto expect = [&](Partial p, const GaussianPairCov& c) {
    return gauss2_expect([&](double x, double z, double xi) { return model.score(p, x, z, xi); }, c, noise, nodes,
                         affine);
  };

  if (mode == MzMode::Self) {
    return {expect(Partial::D1, cov), expect(Partial::D111, cov), expect(Partial::D112, cov),
            expect(Partial::D122, cov)};
  }

  // a = U u + (1-U) mu*, b = mu*; integrate the Gaussian coefficients over U
  Rank2Coeffs c;
  const QuadratureRule& q = gauss_legendre_unit(u_nodes);
  for (Index k = 0; k < q.nodes.size(); ++k) {
    const double uu = q.nodes(k), w = q.weights(k), vv = 1.0 - uu;
    const GaussianPairCov ca{uu * uu * g2 + 2.0 * uu * vv * al + vv * vv * s2, uu * al + vv * s2, s2};
    const double saa = expect(Partial::D111, ca);
    const double sab = expect(Partial::D112, ca);
    const double sbb = expect(Partial::D122, ca);
    c.c0 += w * expect(Partial::D1, ca);
    c.c11 += w * saa * uu * uu;
    c.c12 += w * (saa * uu * vv + sab * uu);
    c.c22 += w * (saa * vv * vv + 2.0 * sab * vv + sbb);
  }
  return c;
}

Rank2Spectrum<double> mz_matrix_eigs(const ModelSpec& model, const GaussianPairCov& cov_in, MzMode mode, Index n,
                                     int u_nodes, int nodes) {
  if (n < 2) throw ConfigError("M-matrix spectrum needs n >= 2");
  const GaussianPairCov cov = cov_in.projected();
  const Rank2Coeffs c = mz_coefficients(model, cov, mode, u_nodes, nodes);
  // realise (u, mu*) in the first two coordinates
  Vector u = Vector::Zero(n), v = Vector::Zero(n);
  const double s = std::sqrt(cov.s2);
  v(0) = s;
  if (s > 0.0) {
    u(0) = cov.alpha / s;
    u(1) = std::sqrt(std::max(0.0, cov.gamma2 - u(0) * u(0)));
  } else {
    u(1) = std::sqrt(cov.gamma2);
  }
  return rank2_eigs(c.c0, c.c11, c.c12, c.c22, u, v);
}

Matrix mz_matrix_dense(const ModelSpec& model, const Vector& u, const Vector& mu_star, MzMode mode, int u_nodes,
                       int nodes) {
  if (u.size() != mu_star.size()) throw ConfigError("u and mu* differ in length");
  const Rank2Coeffs c =
      mz_coefficients(model, {u.squaredNorm(), u.dot(mu_star), mu_star.squaredNorm()}, mode, u_nodes, nodes);
  const Index n = u.size();
  Matrix m = c.c0 * Matrix::Identity(n, n);
  m.noalias() += c.c11 * u * u.transpose();
  m.noalias() += c.c12 * (u * mu_star.transpose() + mu_star * u.transpose());
  m.noalias() += c.c22 * mu_star * mu_star.transpose();
  return m;
}

BQuantities b_quantities(const SeTrack& track, const ModelSpec& model, Index n, double eps_n) {
  if (eps_n < 0.0) throw ConfigError("eps_n must be nonnegative");
  BQuantities q;
  const double s2 = track.geometry.signal_norm2;
  for (const auto& p : track.points) {
    q.lam_min_signal.push_back(mz_matrix_eigs(model, p.cov(s2), MzMode::WithSignal, n).min());
    q.lam_min_self.push_back(mz_matrix_eigs(model, p.cov(s2), MzMode::Self, n).min());
  }
  // B(t) = (B(t-1) + 1) * factor_{t-1}, B(0) = 0
  double b0 = 0.0, b = 0.0;
  q.b0.push_back(0.0);
  q.b.push_back(0.0);
  for (std::size_t t = 1; t < track.points.size(); ++t) {
    const double eta = track.steps(static_cast<Index>(t - 1));
    b0 = (b0 + 1.0) * (1.0 + eta * neg_part(q.lam_min_signal[t - 1]));
    b = (b + 1.0) * (1.0 + eta * neg_part(q.lam_min_self[t - 1]) + eps_n);
    q.b0.push_back(b0);
    q.b.push_back(b);
  }
  return q;
}

namespace {

TauDelta fixed_point_map(const ModelSpec& model, double s, double tau, double delta, int nodes) {
  if (!(tau != 0.0) || !std::isfinite(tau) || !std::isfinite(delta))
    throw NumericError("fixed point iteration left the domain (tau = " + std::to_string(tau) + ")");
  const double r = delta / tau;
  const NoiseSpec& noise = model.noise();
  const bool affine = model.affine_in_noise();
  TauDelta out;
  out.tau = gauss1_expect([&](double z, double xi) { return model.score(Partial::D1, r * s * z, s * z, xi); }, 1.0,
                          noise, nodes, affine);
  out.delta = -gauss1_expect([&](double z, double xi) { return model.score(Partial::D2, r * s * z, s * z, xi); },
                             1.0, noise, nodes, affine);
  return out;
}

} // namespace

double fixed_point_residual(const ModelSpec& model, double mu_star_norm, double tau, double delta, int nodes) {
  const TauDelta f = fixed_point_map(model, mu_star_norm, tau, delta, nodes);
  return std::max(std::abs(f.tau - tau), std::abs(f.delta - delta));
}

FixedPoint solve_fixed_point(const ModelSpec& model, double mu_star_norm, double damping, double tol, int max_iter,
                             int nodes) {
  if (!(mu_star_norm > 0.0)) throw ConfigError("fixed point needs a positive signal norm");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  FixedPoint fp;
  fp.tau = 1.0;
  fp.delta = 0.0;
  double change = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const TauDelta f = fixed_point_map(model, mu_star_norm, fp.tau, fp.delta, nodes);
    const double nt = (1.0 - damping) * fp.tau + damping * f.tau;
    const double nd = (1.0 - damping) * fp.delta + damping * f.delta;
    change = std::max(std::abs(nt - fp.tau), std::abs(nd - fp.delta));
    fp.tau = nt;
    fp.delta = nd;
    if (change < tol) {
      fp.residual = fixed_point_residual(model, mu_star_norm, fp.tau, fp.delta, nodes);
      return fp;
    }
    ++fp.iterations;
  }
  fp.residual = fixed_point_residual(model, mu_star_norm, fp.tau, fp.delta, nodes);
  throw NumericError("fixed point did not converge in " + std::to_string(max_iter) +
                     " iterations; last residual " + std::to_string(fp.residual));
}

void write_se_csv(std::ostream& os, const SeTrack& track, const BQuantities* bq) {
  os << "t,a,b,gamma,alpha,tau,delta,lam_min_signal,lam_min_self,B0,B\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  char buf[768];
  for (std::size_t t = 0; t < track.points.size(); ++t) {
    const auto& p = track.points[t];
    const bool have = bq && t < bq->b0.size();
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, p.a, p.b,
                  p.gamma, p.alpha, p.tau, p.delta, have ? bq->lam_min_signal[t] : nan,
                  have ? bq->lam_min_self[t] : nan, have ? bq->b0[t] : nan, have ? bq->b[t] : nan);
    os << buf;
  }
}

} // namespace gdse
