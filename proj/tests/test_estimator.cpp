#include "gdse/estimator.hpp"
#include "gdse/state_evolution.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gdse;

TEST_CASE("identity link example") {
  EstimatorConfig cfg;
  cfg.eta = 0.5;
  const ModelSpec id = ModelSpec::squared_on_link(LinkFunction::identity());
  const EstimatorStep st = estimator_step(1.0, 0.0, cfg, id);
  CHECK(st.gamma_hat == doctest::Approx(std::sqrt(0.5)));
  CHECK(st.alpha_hat == doctest::Approx(0.5));
  CHECK(st.tau_hat == doctest::Approx(1.0));
  CHECK(st.delta_hat == doctest::Approx(1.0));
  CHECK(!st.clipped);

  cfg.eta = 0.0;
  const EstimatorStep still = estimator_step(0.8, 0.3, cfg, id);
  CHECK(still.gamma_hat == doctest::Approx(0.8));
  CHECK(still.alpha_hat == doctest::Approx(0.3));
}

TEST_CASE("square link tau and delta are noise free") {
  EstimatorConfig cfg;
  const ModelSpec pr = ModelSpec::squared_on_link(LinkFunction::square(), NoiseSpec::gaussian(1.0, 0.7));
  for (double rho : {-0.5, 0.0, 0.6}) {
    const TauDelta td = estimator_tau_delta(1.0, rho, cfg, pr, 0);
    CHECK(td.tau == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(td.delta == doctest::Approx(4 * rho).epsilon(1e-12));
  }
}

TEST_CASE("run with t_max = 0 reports the start") {
  EstimatorConfig cfg;
  cfg.gamma0_hat = 1.2;
  cfg.alpha0_hat = 0.4;
  const EstimatorTrack tr = estimator_run(cfg, ModelSpec::squared_on_link(LinkFunction::sigmoid()), 0);
  REQUIRE(tr.points.size() == 1);
  CHECK(tr.points[0].gamma_hat == 1.2);
  CHECK(tr.points[0].corr_hat == doctest::Approx(0.4 / 1.2));
}

TEST_CASE("exact inputs reproduce the state evolution") {
  for (const char* link : {"sigmoid", "x_plus_sin", "identity"}) {
    const ModelSpec model = ModelSpec::squared_on_link(parse_link(link));
    const Vector mu0 = Vector::Unit(3, 1) * 0.9 + Vector::Unit(3, 0) * 0.2;
    const Vector ms = Vector::Unit(3, 0) * 1.5;
    const SeTrack se = se_run(SeGeometry::from_vectors(mu0, ms), model, StepSchedule(0.3), 40);

    EstimatorConfig cfg;
    cfg.mu_star_norm = 1.5;
    cfg.eta = 0.3;
    cfg.gamma0_hat = mu0.norm();
    cfg.alpha0_hat = mu0.dot(ms);
    const EstimatorTrack tr = estimator_run(cfg, model, 40);
    for (int t = 0; t <= 40; ++t) {
      const Vector u = se.vector_at(t, mu0, ms);
      CHECK(std::abs(tr.points[t].gamma_hat - u.norm()) < 1e-6);
      CHECK(std::abs(tr.points[t].alpha_hat - u.dot(ms)) < 1e-6);
      CHECK(std::abs(tr.points[t].corr_hat - u.dot(ms) / (u.norm() * 1.5)) < 1e-6);
    }
  }
}

TEST_CASE("truncation") {
  CHECK(truncate(3.0, 2.0) == 2.0);
  CHECK(truncate(-3.0, 2.0) == -2.0);
  CHECK(truncate(0.5, 2.0) == 0.5);
  CHECK(truncate(truncate(7.0, 1.0), 1.0) == truncate(7.0, 1.0));

  EstimatorConfig cfg;
  cfg.eta = 10.0;
  cfg.cap = 5.0;
  const ModelSpec pr = ModelSpec::squared_on_link(LinkFunction::square());
  const EstimatorTrack tr = estimator_run(cfg, pr, 10);
  for (const auto& p : tr.points) {
    CHECK(p.gamma_hat <= 5.0);
    CHECK(std::abs(p.alpha_hat) <= p.gamma_hat * cfg.mu_star_norm * (1 + 1e-12));
    CHECK(std::abs(p.corr_hat) <= 1.0 + 1e-12);
  }
}

TEST_CASE("Monte Carlo backend") {
  EstimatorConfig q;
  q.eta = 0.5;
  q.gamma0_hat = 1.0;
  q.alpha0_hat = 0.1;
  EstimatorConfig mc = q;
  mc.backend = ExpectationBackend::MonteCarlo;
  mc.draws = 200000;
  mc.seed = 5;
  const ModelSpec sg = ModelSpec::squared_on_link(LinkFunction::sigmoid());
  const EstimatorTrack a = estimator_run(mc, sg, 20);
  const EstimatorTrack b = estimator_run(mc, sg, 20);
  const EstimatorTrack c = estimator_run(q, sg, 20);
  for (int t = 0; t <= 20; ++t) {
    CHECK(a.points[t].corr_hat == b.points[t].corr_hat);
    CHECK(std::abs(a.points[t].corr_hat - c.points[t].corr_hat) < 5e-3);
  }
}

TEST_CASE("sigmoid estimate improves monotonically from a weak start") {
  EstimatorConfig cfg;
  cfg.eta = 0.5;
  cfg.alpha0_hat = 0.05;
  const EstimatorTrack tr = estimator_run(cfg, ModelSpec::squared_on_link(LinkFunction::sigmoid()), 200);
  for (std::size_t t = 1; t < tr.points.size(); ++t) CHECK(tr.points[t].corr_hat >= tr.points[t - 1].corr_hat - 1e-12);
  CHECK(tr.points.back().corr_hat > 0.99);

  std::ostringstream os;
  write_estimator_csv(os, tr);
  CHECK(os.str().rfind("t,tau_hat,delta_hat,gamma_hat,alpha_hat,corr_hat\n", 0) == 0);
}

TEST_CASE("signal norm by moments") {
  Vector y(4);
  y << 1.0, 3.0, 2.0, 2.0;
  CHECK(square_link_signal_norm(y) == doctest::Approx(std::sqrt(2.0)));
  CHECK(square_link_signal_norm(y, 1.0) == doctest::Approx(1.0));
  CHECK(square_link_signal_norm(y, 5.0) == 0.0);
  CHECK_THROWS_AS(square_link_signal_norm(Vector()), ConfigError);
}

TEST_CASE("validation") {
  const ModelSpec id = ModelSpec::squared_on_link(LinkFunction::identity());
  EstimatorConfig cfg;
  cfg.mu_star_norm = 0.0;
  CHECK_THROWS_AS(estimator_run(cfg, id, 3), ConfigError);
  cfg = {};
  cfg.alpha0_hat = 2.0;
  CHECK_THROWS_AS(estimator_run(cfg, id, 3), ConfigError);
  cfg = {};
  cfg.eta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.backend = ExpectationBackend::MonteCarlo;
  cfg.draws = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
