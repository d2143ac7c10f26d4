#include "gdse/meanfield.hpp"
#include "gdse/linalg.hpp"
#include "gdse/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace gdse {

namespace {

// per-draw workspace, laid out draw-major
struct Draws {
  int count = 0;
  int t_max = 0;
  std::vector<double> eps;   // count x (T+1) standard normals
  std::vector<double> z;     // count x (T+1)
  std::vector<double> xi;    // count
  std::vector<double> ups;   // count x T
  std::vector<double> dups;  // count x T x T, dups[r][s] = d Upsilon_{r+1} / d z^{s+1}
  std::vector<double> d0;    // count x T

  double& e(int k, int t) { return eps[static_cast<std::size_t>(k) * (t_max + 1) + t]; }
  double& zz(int k, int t) { return z[static_cast<std::size_t>(k) * (t_max + 1) + t]; }
  double& u(int k, int t) { return ups[static_cast<std::size_t>(k) * t_max + t]; }
  double& du(int k, int r, int s) { return dups[(static_cast<std::size_t>(k) * t_max + r) * t_max + s]; }
  double& dz0(int k, int r) { return d0[static_cast<std::size_t>(k) * t_max + r]; }
};

double double_factorial(int k) {
  double r = 1.0;
  for (int j = k; j > 1; j -= 2) r *= j;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

} // namespace

Vector MfTrack::omega(int t, const Vector& mu0, const Vector& mu_star, const Matrix& w) const {
  const double rn = std::sqrt(static_cast<double>(mu0.size()));
  Vector out = rn * (a(t) * mu0 + b(t) * mu_star);
  if (t > 0) out.noalias() += w.leftCols(t) * w_coef.row(t).head(t).transpose();
  return out;
}

Vector mf_omega_recursive(const MfTrack& mf, int t, const Vector& mu0, const Vector& mu_star, const Matrix& w) {
  const double rn = std::sqrt(static_cast<double>(mu0.size()));
  std::vector<Vector> om{rn * mu0};
  for (int k = 1; k <= t; ++k) {
    const double eta = mf.steps(k - 1);
    Vector next = w.col(k - 1) + eta * mf.delta(k - 1) * rn * mu_star;
    for (int s = 1; s <= k; ++s) next += ((k == s ? 1.0 : 0.0) - eta * mf.tau(k - 1, s - 1)) * om[s - 1];
    om.push_back(next);
  }
  return om[t];
}

std::vector<double> mf_upsilon(const MfTrack& mf, const ModelSpec& model, int t, const Vector& z, double xi) {
  if (t < 1 || t > mf.t_max || z.size() < t + 1) throw ConfigError("mf_upsilon: need z^(0..t) with 1 <= t <= t_max");
  std::vector<double> ups;
  for (int k = 1; k <= t; ++k) {
    double theta = z(k);
    for (int s = 1; s < k; ++s) theta -= mf.steps(s - 1) * mf.rho(k - 1, s) / mf.phi * ups[s - 1];
    ups.push_back(model.score(Partial::S, theta, z(0), xi));
  }
  return ups;
}

MfTrack mf_run(const Vector& mu0, const Vector& mu_star, const ModelSpec& model, const MfConfig& cfg) {
  if (mu0.size() != mu_star.size() || mu0.size() == 0) throw ConfigError("mean field: mu0 and mu* must match");
  if (!(cfg.phi > 0.0)) throw ConfigError("mean field: phi must be positive");
  if (cfg.t_max < 1) throw ConfigError("mean field: t_max must be >= 1");
  if (cfg.mc_draws < 1 || cfg.chunk < 1) throw ConfigError("mean field: draws must be positive");

  const int T = cfg.t_max, D = cfg.mc_draws;
  const double phi = cfg.phi;
  MfTrack mf;
  mf.t_max = T;
  mf.phi = phi;
  mf.mc_draws = D;
  mf.steps = cfg.steps;
  mf.geometry = SeGeometry::from_vectors(mu0, mu_star);
  mf.sigma_z = Matrix::Zero(T + 1, T + 1);
  mf.sigma_w = Matrix::Zero(T, T);
  mf.tau = Matrix::Zero(T, T);
  mf.delta = Vector::Zero(T);
  mf.w_coef = Matrix::Zero(T + 1, T);
  mf.a = Vector::Zero(T + 1);
  mf.b = Vector::Zero(T + 1);
  mf.a(0) = 1.0;
  if (!cfg.steps.constant())
    mf.notes.push_back("varying step sizes: Cov(w_t, w_s) uses eta_{t-1}^2 as printed, not eta_{t-1} eta_{s-1}");

  Matrix gram(2, 2);
  gram << mf.geometry.init_norm2, mf.geometry.cross, mf.geometry.cross, mf.geometry.signal_norm2;

  Draws dr;
  dr.count = D;
  dr.t_max = T;
  dr.eps.resize(static_cast<std::size_t>(D) * (T + 1));
  dr.z.assign(dr.eps.size(), 0.0);
  dr.xi.resize(D);
  dr.ups.assign(static_cast<std::size_t>(D) * T, 0.0);
  dr.dups.assign(static_cast<std::size_t>(D) * T * T, 0.0);
  dr.d0.assign(static_cast<std::size_t>(D) * T, 0.0);

  const int chunks = (D + cfg.chunk - 1) / cfg.chunk;
  parallel_for(chunks, cfg.threads, [&](int c) {
    std::mt19937_64 rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> nd;
    const int lo = c * cfg.chunk, hi = std::min(D, lo + cfg.chunk);
    for (int k = lo; k < hi; ++k) {
      for (int t = 0; t <= T; ++t) dr.e(k, t) = nd(rng);
      dr.xi[k] = model.noise().sample(rng);
    }
  });

  // (a, b, W) of Omega_{k}, with Omega_{-1} = sqrt(n) mu*
  auto coeff_ab = [&](int k) -> Eigen::Vector2d {
    if (k < 0) return {0.0, 1.0};
    return {mf.a(k), mf.b(k)};
  };
  auto z_cov = [&](int i, int j) {
    // Cov(z^i, z^j) = E_pi Omega_{i-1} Omega_{j-1}
    const double c = coeff_ab(i - 1).dot(gram * coeff_ab(j - 1));
    if (i - 1 <= 0 || j - 1 <= 0) return c;
    const int ti = i - 1, tj = j - 1;
    return c + mf.w_coef.row(ti).head(ti) * mf.sigma_w.topLeftCorner(ti, tj) * mf.w_coef.row(tj).head(tj).transpose();
  };

  Matrix chol = Matrix::Zero(T + 1, T + 1);
  auto extend_cholesky = [&](int t) {
    for (int j = 0; j <= t; ++j) mf.sigma_z(t, j) = mf.sigma_z(j, t) = z_cov(t, j);
    const double scale = std::max(1.0, mf.sigma_z.topLeftCorner(t + 1, t + 1).diagonal().maxCoeff());
    for (int j = 0; j < t; ++j) {
      const double piv = chol(j, j);
      chol(t, j) = piv > 0.0 ? (mf.sigma_z(t, j) - chol.row(t).head(j).dot(chol.row(j).head(j))) / piv : 0.0;
    }
    const double d = mf.sigma_z(t, t) - chol.row(t).head(t).squaredNorm();
    if (d < -1e-6 * scale)
      throw NumericError("Sigma_Z lost positive semidefiniteness at minor " + std::to_string(t) + " (pivot " +
                         std::to_string(d) + ")");
    chol(t, t) = d > 1e-14 * scale ? std::sqrt(d) : 0.0;
  };

  extend_cholesky(0);
  for (int t = 1; t <= T; ++t) {
    extend_cholesky(t);
    const double eta_t = cfg.steps(t - 1);
    // coefficient of Upsilon_s inside Theta_t: eta_{s-1} rho_{t-1,s} / phi
    std::vector<double> gain(static_cast<std::size_t>(t), 0.0);
    for (int s = 1; s < t; ++s) gain[s] = cfg.steps(s - 1) * mf.rho(t - 1, s) / phi;

    // per-chunk partial sums, reduced in chunk order
    const int width = 2 * t + 1; // tau_{t,1..t}, delta_t, E Upsilon_t Upsilon_{1..t}
    std::vector<double> sums(static_cast<std::size_t>(chunks) * width, 0.0);
    parallel_for(chunks, cfg.threads, [&](int c) {
      const int lo = c * cfg.chunk, hi = std::min(D, lo + cfg.chunk);
      double* acc = sums.data() + static_cast<std::size_t>(c) * width;
      for (int k = lo; k < hi; ++k) {
        double zt = 0.0;
        for (int j = 0; j <= t; ++j) zt += chol(t, j) * dr.e(k, j);
        dr.zz(k, t) = zt;
        if (t == 1) dr.zz(k, 0) = chol(0, 0) * dr.e(k, 0);
        const double z0 = dr.zz(k, 0), xi = dr.xi[k];
        double theta = zt;
        for (int s = 1; s < t; ++s) theta -= gain[s] * dr.u(k, s - 1);
        const double f0 = model.score(Partial::S, theta, z0, xi);
        const double f1 = model.score(Partial::D1, theta, z0, xi);
        const double f2 = model.score(Partial::D2, theta, z0, xi);
        dr.u(k, t - 1) = f0;
        for (int s = 1; s <= t; ++s) {
          double inner = s == t ? 1.0 : 0.0;
          for (int r = s; r < t; ++r) inner -= gain[r] * dr.du(k, r - 1, s - 1);
          const double v = f1 * inner;
          dr.du(k, t - 1, s - 1) = v;
          acc[s - 1] += v;
        }
        double inner0 = 0.0;
        for (int r = 1; r < t; ++r) inner0 -= gain[r] * dr.dz0(k, r - 1);
        const double v0 = f1 * inner0 + f2;
        dr.dz0(k, t - 1) = v0;
        acc[t] -= v0;
        for (int s = 1; s <= t; ++s) acc[t + s] += f0 * dr.u(k, s - 1);
      }
    });
    std::vector<double> total(static_cast<std::size_t>(width), 0.0);
    for (int c = 0; c < chunks; ++c)
      for (int j = 0; j < width; ++j) total[j] += sums[static_cast<std::size_t>(c) * width + j];
    for (int s = 1; s <= t; ++s) mf.tau(t - 1, s - 1) = total[s - 1] / D;
    mf.delta(t - 1) = total[t] / D;
    for (int s = 1; s <= t; ++s)
      mf.sigma_w(t - 1, s - 1) = mf.sigma_w(s - 1, t - 1) = eta_t * eta_t / phi * total[t + s] / D;
    if (!mf.tau.allFinite() || !mf.delta.allFinite() || !mf.sigma_w.allFinite())
      throw NumericError("mean field produced non-finite coefficients at t=" + std::to_string(t));
    {
      Eigen::SelfAdjointEigenSolver<Matrix> es(mf.sigma_w.topLeftCorner(t, t), Eigen::EigenvaluesOnly);
      const double scale = std::max(1.0, mf.sigma_w.topLeftCorner(t, t).diagonal().maxCoeff());
      if (es.eigenvalues()(0) < -1e-6 * scale)
        throw NumericError("Sigma_W lost positive semidefiniteness at t=" + std::to_string(t) + " (eigenvalue " +
                           std::to_string(es.eigenvalues()(0)) + ")");
    }

    // (S3): Omega_t = w_t + sum_s (1{t=s} - eta tau_{t,s}) Omega_{s-1} + eta delta_t sqrt(n) mu*
    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(T);
    w(t - 1) = 1.0;
    double an = 0.0, bn = eta_t * mf.delta(t - 1);
    for (int s = 1; s <= t; ++s) {
      const double c = (s == t ? 1.0 : 0.0) - eta_t * mf.tau(t - 1, s - 1);
      w += c * mf.w_coef.row(s - 1);
      an += c * mf.a(s - 1);
      bn += c * mf.b(s - 1);
    }
    mf.w_coef.row(t) = w;
    mf.a(t) = an;
    mf.b(t) = bn;
  }
  return mf;
}

double gaussian_abs_moment(double d, double sigma, int p) {
  if (p < 2 || p % 2 != 0) throw ConfigError("moment order must be even and >= 2");
  double total = 0.0;
  for (int k = 0; k <= p; k += 2) total += binomial(p, k) * std::pow(d, p - k) * std::pow(sigma, k) * double_factorial(k - 1);
  return total;
}

std::vector<MfDiagnostics> mf_compare(const MfTrack& mf, const SeTrack& se, const Vector& mu0, const Vector& mu_star,
                                      int p) {
  const SeGeometry g = SeGeometry::from_vectors(mu0, mu_star);
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-10 * std::max(1.0, std::abs(x) + std::abs(y)); };
  if (!close(g.init_norm2, mf.geometry.init_norm2) || !close(g.cross, mf.geometry.cross) ||
      !close(g.signal_norm2, mf.geometry.signal_norm2) || !close(g.init_norm2, se.geometry.init_norm2) ||
      !close(g.cross, se.geometry.cross) || !close(g.signal_norm2, se.geometry.signal_norm2))
    throw ConfigError("mf_compare: geometry of the mean field and state evolution tracks differ");
  if (static_cast<int>(se.points.size()) < mf.t_max + 1) throw ConfigError("mf_compare: state evolution track too short");
  for (int t = 0; t < mf.t_max; ++t)
    if (mf.steps(t) != se.steps(t)) throw ConfigError("mf_compare: step sizes differ");
  if (p < 2 || p % 2 != 0) throw ConfigError("mf_compare: p must be even");

  const double rn = std::sqrt(static_cast<double>(mu0.size()));
  std::vector<MfDiagnostics> out;
  for (int t = 1; t <= mf.t_max; ++t) {
    MfDiagnostics dg;
    dg.t = t;
    dg.phi = mf.phi;
    dg.p = p;
    dg.mc_draws = mf.mc_draws;
    Matrix diff = mf.tau.topLeftCorner(t, t).triangularView<Eigen::Lower>();
    for (int s = 1; s <= t; ++s) diff(s - 1, s - 1) -= se.points[s - 1].tau;
    dg.offdiag_tau = operator_norm(diff);
    dg.w_cov_max = mf.sigma_w.row(t - 1).head(t).cwiseAbs().maxCoeff();
    const Vector d = rn * ((mf.a(t) - se.points[t].a) * mu0 + (mf.b(t) - se.points[t].b) * mu_star);
    const Eigen::RowVectorXd wt = mf.w_coef.row(t).head(t);
    const double var = wt * mf.sigma_w.topLeftCorner(t, t) * wt.transpose();
    dg.omega_gap = gaussian_abs_moment(d.cwiseAbs().maxCoeff(), std::sqrt(std::max(0.0, var)), p);
    out.push_back(dg);
  }
  return out;
}

void write_mf_csv(std::ostream& os, const std::vector<MfDiagnostics>& diags) {
  os << "t,phi,offdiag_tau,w_cov_max,omega_gap_p,mc_draws\n";
  char buf[512];
  for (const auto& d : diags) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d\n", d.t, d.phi, d.offdiag_tau, d.w_cov_max,
                  d.omega_gap, d.mc_draws);
    os << buf;
  }
}

} // namespace gdse
