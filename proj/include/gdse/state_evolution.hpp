#pragma once

#include "gdse/design.hpp"
#include "gdse/linalg.hpp"
#include "gdse/model.hpp"
#include "gdse/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gdse {

/// Gram numbers of (mu0, mu*).
struct SeGeometry {
  double init_norm2 = 1.0;
  double cross = 0.0;
  double signal_norm2 = 1.0;

  static SeGeometry from_vectors(const Vector& mu0, const Vector& mu_star);
};

/// u*^(t) = a mu0 + b mu*; (tau, delta) are evaluated at this point and
/// drive the step to t + 1.
struct SePoint {
  double a = 1.0;
  double b = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  double delta = 0.0;

  GaussianPairCov cov(double signal_norm2) const { return {gamma * gamma, alpha, signal_norm2}; }
};

struct SeTrack {
  SeGeometry geometry;
  std::vector<SePoint> points;
  StepSchedule steps;
  bool halted = false;
  std::string report;

  Vector vector_at(std::size_t t, const Vector& mu0, const Vector& mu_star) const {
    return points.at(t).a * mu0 + points.at(t).b * mu_star;
  }
  std::vector<Vector> path(const Vector& mu0, const Vector& mu_star) const;
};

SeTrack se_run(const SeGeometry& geometry, const ModelSpec& model, const StepSchedule& steps, int t_max,
               int nodes = kDefaultNodes);

/// Monte Carlo theoretical gradient descent under the law of the design:
/// each step replaces E x S(<x,u>, <x,mu*>, xi) by an average over mc_reps
/// fresh rows. `std_error[t]` is sqrt(trace) of the propagated MC covariance
/// of u^(t), obtained by linearising the map around the realised path.
struct TheoreticalGdTrack {
  std::vector<Vector> u;
  std::vector<Matrix> cov;
  std::vector<double> std_error;
};

TheoreticalGdTrack theoretical_gd_mc(const DesignKind& kind, const ModelSpec& model, const Vector& mu0,
                                     const Vector& mu_star, const StepSchedule& steps, int t_max, int mc_reps,
                                     std::uint64_t seed);

/// Phase retrieval in (signal overlap, orthogonal norm) coordinates.
struct PrState {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.1;
  double noise_mean = 0.0;
};

PrState pr_step(const PrState& s);
std::vector<PrState> pr_run(const PrState& s0, int t_max);

struct StageParams {
  double c0 = 1.0;
  double m = 0.0;            // sample size entering the log^5 m threshold
  double eps0 = 0.01;
  double beta_tol = 0.05;    // Stage 1 ends once |beta - 1/sqrt 3| <= beta_tol

  double signal_threshold() const;
};

/// First-hitting times; -1 marks "not reached".
struct StageTimes {
  int stage1_end = -1;
  int t0 = -1;
  int t_eps = -1;
  std::string summary;
};

StageTimes pr_stage_times(const std::vector<PrState>& track, const StageParams& params);

enum class MzMode { WithSignal, Self };

/// Coefficients of c0 I + c11 uu^T + c12 (u mu*^T + mu* u^T) + c22 mu* mu*^T.
struct Rank2Coeffs {
  double c0 = 0.0;
  double c11 = 0.0;
  double c12 = 0.0;
  double c22 = 0.0;
};

Rank2Coeffs mz_coefficients(const ModelSpec& model, const GaussianPairCov& cov, MzMode mode, int u_nodes = 16,
                            int nodes = kDefaultNodes);

/// Spectrum of the Gaussian M-matrix at (u, mu*) whose Gram numbers are
/// given by cov, embedded in R^n.
Rank2Spectrum<double> mz_matrix_eigs(const ModelSpec& model, const GaussianPairCov& cov, MzMode mode, Index n,
                                     int u_nodes = 16, int nodes = kDefaultNodes);

Matrix mz_matrix_dense(const ModelSpec& model, const Vector& u, const Vector& mu_star, MzMode mode, int u_nodes = 16,
                       int nodes = kDefaultNodes);

struct BQuantities {
  std::vector<double> b0;
  std::vector<double> b;
  std::vector<double> lam_min_signal;
  std::vector<double> lam_min_self;
};

BQuantities b_quantities(const SeTrack& track, const ModelSpec& model, Index n, double eps_n = 0.0);

struct FixedPoint {
  double tau = 0.0;
  double delta = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// The fixed-point integrals are one-dimensional, so a finer default rule is cheap.
inline constexpr int kFixedPointNodes = 160;

/// Damped Picard iteration on tau = E d1 S(rG, G, xi), delta = -E d2 S(rG, G, xi),
/// r = delta / tau, G ~ N(0, |mu*|^2).
FixedPoint solve_fixed_point(const ModelSpec& model, double mu_star_norm, double damping = 0.5, double tol = 1e-12,
                             int max_iter = 10000, int nodes = kFixedPointNodes);

/// Both residuals of the fixed-point equations at (tau, delta).
double fixed_point_residual(const ModelSpec& model, double mu_star_norm, double tau, double delta,
                            int nodes = kFixedPointNodes);

/// Columns t, a, b, gamma, alpha, tau, delta, lam_min_signal, lam_min_self, B0, B;
/// the last four are NaN without b-quantities.
void write_se_csv(std::ostream& os, const SeTrack& track, const BQuantities* bq = nullptr);

} // namespace gdse
