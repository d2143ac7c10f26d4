#include "gdse/meanfield.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace gdse;

namespace {

struct Setup {
  Vector mu0, ms;
};

Setup geometry(Index n) {
  Setup s{Vector::Zero(n), Vector::Constant(n, 1.0 / std::sqrt(double(n)))};
  s.mu0(0) = 0.6;
  s.mu0(1) = -0.8;
  return s;
}

} // namespace

TEST_CASE("first step covariances") {
  const Setup g = geometry(20);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::sigmoid(), NoiseSpec::gaussian(0.2));
  MfConfig cfg;
  cfg.phi = 5.0;
  cfg.t_max = 1;
  cfg.mc_draws = 2000;
  const MfTrack mf = mf_run(g.mu0, g.ms, sg, cfg);
  CHECK(mf.sigma_z(0, 0) == doctest::Approx(g.ms.squaredNorm()));
  CHECK(mf.sigma_z(1, 1) == doctest::Approx(g.mu0.squaredNorm()));
  CHECK(mf.sigma_z(0, 1) == doctest::Approx(g.mu0.dot(g.ms)));

  const ModelSpec id = ModelSpec::squared_on_link(LinkFunction::identity());
  const MfTrack lin = mf_run(g.mu0, g.ms, id, cfg);
  CHECK(lin.tau(0, 0) == doctest::Approx(1.0));
  CHECK(lin.delta(0) == doctest::Approx(1.0));
  CHECK(lin.rho(1, 1) == 1.0);
}

TEST_CASE("large aspect ratio approaches the state evolution") {
  const Setup g = geometry(50);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::sigmoid());
  MfConfig cfg;
  cfg.phi = 1e4;
  cfg.t_max = 3;
  cfg.steps = StepSchedule(0.5);
  cfg.mc_draws = 100000;
  const MfTrack mf = mf_run(g.mu0, g.ms, sg, cfg);
  const SeTrack se = se_run(SeGeometry::from_vectors(g.mu0, g.ms), sg, cfg.steps, 3);
  for (const auto& d : mf_compare(mf, se, g.mu0, g.ms)) {
    CHECK(d.offdiag_tau < 5e-2);
    CHECK(d.w_cov_max < 5e-2);
    CHECK(d.omega_gap < 5e-2);
  }
}

TEST_CASE("affine representation matches the recursion") {
  const Setup g = geometry(8);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::x_plus_sin(), NoiseSpec::gaussian(0.3));
  MfConfig cfg;
  cfg.phi = 3.0;
  cfg.t_max = 4;
  cfg.steps = StepSchedule(0.2);
  cfg.mc_draws = 5000;
  const MfTrack mf = mf_run(g.mu0, g.ms, sg, cfg);
  CHECK(mf.notes.empty());
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Matrix w(8, 4);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = nd(rng);
  for (int t = 0; t <= 4; ++t)
    CHECK((mf.omega(t, g.mu0, g.ms, w) - mf_omega_recursive(mf, t, g.mu0, g.ms, w)).norm() < 1e-12);
}

TEST_CASE("varying steps can leave Sigma_W indefinite") {
  // Cov(w_t, w_s) carries eta_{t-1}^2 rather than eta_{t-1} eta_{s-1}
  const Setup g = geometry(8);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::x_plus_sin(), NoiseSpec::gaussian(0.3));
  MfConfig cfg;
  cfg.phi = 3.0;
  cfg.t_max = 4;
  cfg.steps = StepSchedule(std::vector<double>{0.2, 0.1, 0.3});
  cfg.mc_draws = 5000;
  CHECK_THROWS_WITH_AS(mf_run(g.mu0, g.ms, sg, cfg), doctest::Contains("Sigma_W"), NumericError);
}

TEST_CASE("tau is the mean derivative of Upsilon") {
  const Setup g = geometry(10);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::sigmoid(), NoiseSpec::gaussian(0.3));
  MfConfig cfg;
  cfg.phi = 1.5;
  cfg.t_max = 3;
  cfg.steps = StepSchedule(2.0);
  cfg.mc_draws = 200000;
  cfg.seed = 9;
  const MfTrack mf = mf_run(g.mu0, g.ms, sg, cfg);

  // fresh draws of z^(0..T) from Sigma_Z, bump one coordinate and difference
  const int T = 3, draws = 200000;
  const double h = 1e-4;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mf.sigma_z);
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  Matrix sum = Matrix::Zero(T, T), sq = Matrix::Zero(T, T);
  Vector e(T + 1);
  for (int k = 0; k < draws; ++k) {
    for (int j = 0; j <= T; ++j) e(j) = nd(rng);
    const Vector z = root * e;
    const double xi = sg.noise().sample(rng);
    for (int s = 1; s <= T; ++s) {
      Vector zp = z, zm = z;
      zp(s) += h;
      zm(s) -= h;
      const auto up = mf_upsilon(mf, sg, T, zp, xi), um = mf_upsilon(mf, sg, T, zm, xi);
      for (int t = s; t <= T; ++t) {
        const double d = (up[t - 1] - um[t - 1]) / (2 * h);
        sum(t - 1, s - 1) += d;
        sq(t - 1, s - 1) += d * d;
      }
    }
  }
  for (int t = 1; t <= T; ++t)
    for (int s = 1; s <= t; ++s) {
      const double mean = sum(t - 1, s - 1) / draws;
      const double var = sq(t - 1, s - 1) / draws - mean * mean;
      // both estimates carry Monte Carlo error of the same size
      const double se = std::sqrt(var / draws + var / cfg.mc_draws);
      CHECK(std::abs(mean - mf.tau(t - 1, s - 1)) <= 3 * se + 1e-6);
    }
}

TEST_CASE("exact start without noise has no fluctuation") {
  const Setup g = geometry(12);
  const ModelSpec id = ModelSpec::squared_on_link(LinkFunction::identity());
  MfConfig cfg;
  cfg.phi = 2.0;
  cfg.t_max = 3;
  cfg.mc_draws = 1000;
  const MfTrack mf = mf_run(g.ms, g.ms, id, cfg);
  const SeTrack se = se_run(SeGeometry::from_vectors(g.ms, g.ms), id, cfg.steps, 3);
  CHECK(mf.sigma_w.cwiseAbs().maxCoeff() < 1e-20);
  for (const auto& d : mf_compare(mf, se, g.ms, g.ms)) {
    CHECK(d.w_cov_max < 1e-20);
    CHECK(d.omega_gap < 1e-20);
  }
}

TEST_CASE("Gaussian absolute moments") {
  CHECK(gaussian_abs_moment(0.0, 1.0, 2) == doctest::Approx(1.0));
  CHECK(gaussian_abs_moment(2.0, 0.0, 4) == doctest::Approx(16.0));
  CHECK(gaussian_abs_moment(1.0, 2.0, 2) == doctest::Approx(5.0));
  // E(d + sG)^4 = d^4 + 6 d^2 s^2 + 3 s^4
  CHECK(gaussian_abs_moment(1.5, 0.5, 4) == doctest::Approx(std::pow(1.5, 4) + 6 * 2.25 * 0.25 + 3 * 0.0625));
  CHECK(gaussian_abs_moment(0.0, 1.0, 6) == doctest::Approx(15.0));
  CHECK_THROWS_AS(gaussian_abs_moment(1.0, 1.0, 3), ConfigError);
}

TEST_CASE("covariances stay positive semidefinite") {
  const Setup g = geometry(30);
  const ModelSpec pr = ModelSpec::squared_on_link(LinkFunction::quad_plus_linear(), NoiseSpec::gaussian(0.5));
  MfConfig cfg;
  cfg.phi = 4.0;
  cfg.t_max = 4;
  cfg.steps = StepSchedule(0.05);
  cfg.mc_draws = 20000;
  const MfTrack mf = mf_run(g.mu0, g.ms, pr, cfg);
  Eigen::SelfAdjointEigenSolver<Matrix> ez(mf.sigma_z), ew(mf.sigma_w);
  CHECK(ez.eigenvalues()(0) > -1e-10);
  CHECK(ew.eigenvalues()(0) > -1e-10);
}

TEST_CASE("results do not depend on the thread count") {
  const Setup g = geometry(10);
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::sigmoid(), NoiseSpec::gaussian(0.2));
  MfConfig cfg;
  cfg.phi = 3.0;
  cfg.t_max = 3;
  cfg.mc_draws = 10000;
  cfg.chunk = 1000;
  const MfTrack one = mf_run(g.mu0, g.ms, sg, cfg);
  cfg.threads = 4;
  const MfTrack four = mf_run(g.mu0, g.ms, sg, cfg);
  CHECK(one.tau == four.tau);
  CHECK(one.sigma_w == four.sigma_w);
  CHECK(one.w_coef == four.w_coef);
}

TEST_CASE("diagnostics shrink with the aspect ratio") {
  const Setup g = geometry(20);
  const ModelSpec id = ModelSpec::squared_on_link(LinkFunction::identity(), NoiseSpec::gaussian(0.5));
  const SeTrack se = se_run(SeGeometry::from_vectors(g.mu0, g.ms), id, StepSchedule(0.1), 3);
  double prev = 1e300;
  for (double phi : {10.0, 100.0, 1000.0}) {
    MfConfig cfg;
    cfg.phi = phi;
    cfg.t_max = 3;
    cfg.mc_draws = 50000;
    const auto d = mf_compare(mf_run(g.mu0, g.ms, id, cfg), se, g.mu0, g.ms);
    CHECK(d.back().w_cov_max < prev);
    prev = d.back().w_cov_max;
  }
  std::ostringstream os;
  MfConfig cfg;
  write_mf_csv(os, mf_compare(mf_run(g.mu0, g.ms, id, cfg), se, g.mu0, g.ms));
  CHECK(os.str().rfind("t,phi,offdiag_tau,w_cov_max,omega_gap_p,mc_draws\n", 0) == 0);
  cfg.phi = -1.0;
  CHECK_THROWS_AS(mf_run(g.mu0, g.ms, id, cfg), ConfigError);
}
