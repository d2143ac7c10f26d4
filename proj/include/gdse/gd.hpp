#pragma once

#include "gdse/design.hpp"
#include "gdse/model.hpp"
#include "gdse/types.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gdse {

struct GdConfig {
  StepSchedule steps{0.1};
  int t_max = 100;
  Vector init;
  int record_every = 1;
  double divergence_cutoff = 1e12;
  /// Stop once |corr| exceeds this value; disabled when <= 0.
  double early_stop_corr = 0.0;
  bool keep_iterates = true;
};

/// Vectors the diagnostics are measured against.
struct GdTargets {
  Vector mu_star;               // empty: overlap/corr reported as NaN
  std::vector<Vector> se_path;  // u*^(t); empty: conc_error reported as NaN
};

struct GdRecord {
  int t = 0;
  double norm = 0.0;
  double overlap = 0.0;
  double corr = 0.0;
  double incoherence = 0.0;
  double conc_error = std::numeric_limits<double>::quiet_NaN();
};

struct GdTrajectory {
  std::vector<Vector> iterates;  // recorded iterates; iterates[0] is the initialisation
  std::vector<GdRecord> records;
  Vector final_iterate;
  int last_t = 0;
  bool diverged = false;
  std::string report;
};

struct Responses {
  Vector y;
  Vector xi;
};

/// Y_i = F(<X_i, mu*>, xi_i) with xi drawn from the model's noise law.
Responses generate_response(const DesignMatrix& x, const Vector& mu_star, const ModelSpec& model, std::uint64_t seed);

/// mu^(t) = mu^(t-1) - (eta_{t-1}/m) X^T dL(X mu^(t-1), Y).
GdTrajectory run_gd(const DesignMatrix& x, const Vector& y, const ModelSpec& model, const GdConfig& cfg,
                    const GdTargets& targets = {});

/// Same iteration with row i zeroed (still normalised by m).
GdTrajectory leave_one_out(const DesignMatrix& x, Index i, const Vector& y, const ModelSpec& model,
                           const GdConfig& cfg, const GdTargets& targets = {});

double incoherence(const DesignMatrix& x, const Vector& mu);
double oracle_corr(const Vector& mu, const Vector& mu_star);

/// (1/m) sum_i E_U d11 L(<X_i, U u + (1-U) v>, Y_i) X_i X_i^T; the U-average
/// uses Gauss-Legendre nodes on [0, 1] and collapses when u == v.
Matrix empirical_M(const DesignMatrix& x, const Vector& y, const Vector& u, const Vector& v, const ModelSpec& model,
                   int u_nodes = 16);

/// Product statistic over a pair of iterate sequences, using empirical_M.
double gd_product_statistic(const DesignMatrix& x, const Vector& y, const ModelSpec& model,
                            const std::vector<Vector>& us, const std::vector<Vector>& vs, const StepSchedule& steps,
                            int u_nodes = 16);

void write_trajectory_csv(std::ostream& os, const GdTrajectory& tr);
/// Raw little-endian dump: int64 count, int64 n, then count*n doubles.
void write_iterates_binary(std::ostream& os, const GdTrajectory& tr);

} // namespace gdse
