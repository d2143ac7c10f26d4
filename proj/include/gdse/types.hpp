#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Bad user input: malformed config, invalid parameters, contract violations.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: non-finite values, non-PSD covariances, no convergence.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Step sizes eta_0, eta_1, ...; the last entry repeats past the end.
class StepSchedule {
public:
  StepSchedule() = default;
  StepSchedule(double eta) : etas_{eta} {}
  explicit StepSchedule(std::vector<double> etas) : etas_(std::move(etas)) {}

  double operator()(Index t) const {
    if (etas_.empty()) throw ConfigError("empty step schedule");
    return t < static_cast<Index>(etas_.size()) ? etas_[static_cast<std::size_t>(t)] : etas_.back();
  }
  bool constant() const {
    for (double e : etas_)
      if (e != etas_.front()) return false;
    return true;
  }
  const std::vector<double>& values() const { return etas_; }

private:
  std::vector<double> etas_;
};

/// Stream seed for replication r derived from a base seed.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t r) {
  return base ^ (r * 0x9E3779B97F4A7C15ULL);
}

} // namespace gdse
