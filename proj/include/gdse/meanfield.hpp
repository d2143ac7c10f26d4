#pragma once

#include "gdse/model.hpp"
#include "gdse/state_evolution.hpp"
#include "gdse/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gdse {

struct MfConfig {
  StepSchedule steps{0.1};
  double phi = 10.0;
  int t_max = 3;
  int mc_draws = 10000;
  std::uint64_t seed = 0;
  int chunk = 4096;   // draws per RNG stream; results do not depend on threading
  int threads = 1;
};

/// Mean-field state after t_max iterations. Indices follow the recursion:
/// sigma_z is indexed by [0:T] (z^0 is the signal coordinate), sigma_w, tau,
/// rho by [1:T] stored at offset 0. Omega_t = sqrt(n)(a_t mu0 + b_t mu*) +
/// sum_s w_coef(t, s) w^(s), so the prefix t of every array is the state at t.
struct MfTrack {
  int t_max = 0;
  double phi = 0.0;
  int mc_draws = 0;
  StepSchedule steps;
  SeGeometry geometry;
  Matrix sigma_z;      // (T+1) x (T+1)
  Matrix sigma_w;      // T x T
  Matrix tau;          // T x T, lower triangular: tau(t-1, s-1) = tau_{t,s}
  Vector delta;        // delta(t-1) = delta_t
  Matrix w_coef;       // (T+1) x T, row t holds the weights of Omega_t (row 0 zero)
  Vector a, b;         // length T+1
  std::vector<std::string> notes;

  /// rho_{t,s} = d Omega_t / d w^(s): the affine slope.
  double rho(int t, int s) const { return w_coef(t, s - 1); }
  /// Omega_t at a realisation of w^(1..t) (columns of w, one row per coordinate).
  Vector omega(int t, const Vector& mu0, const Vector& mu_star, const Matrix& w) const;
};

MfTrack mf_run(const Vector& mu0, const Vector& mu_star, const ModelSpec& model, const MfConfig& cfg);

/// Direct evaluation of the Omega recursion, kept for cross-checking the
/// affine representation.
Vector mf_omega_recursive(const MfTrack& mf, int t, const Vector& mu0, const Vector& mu_star, const Matrix& w);

/// Upsilon_1..Upsilon_t at one realisation of z^(0..t) and xi, with the
/// track's rho; used to cross-check the derivative recursion.
std::vector<double> mf_upsilon(const MfTrack& mf, const ModelSpec& model, int t, const Vector& z, double xi);

struct MfDiagnostics {
  int t = 0;
  double phi = 0.0;
  double offdiag_tau = 0.0;
  double w_cov_max = 0.0;
  double omega_gap = 0.0;
  int p = 2;
  int mc_draws = 0;
};

/// E|d + sigma G|^p for even p.
double gaussian_abs_moment(double d, double sigma, int p);

std::vector<MfDiagnostics> mf_compare(const MfTrack& mf, const SeTrack& se, const Vector& mu0, const Vector& mu_star,
                                      int p = 2);

void write_mf_csv(std::ostream& os, const std::vector<MfDiagnostics>& diags);

} // namespace gdse
