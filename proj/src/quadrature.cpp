#include "gdse/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace gdse {

namespace {

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix with zero
// diagonal and the given off-diagonal; weights are squared first components.
QuadratureRule golub_welsch(int n, double (*offdiag)(int)) {
  Matrix j = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = offdiag(k);
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  QuadratureRule r;
  r.nodes = es.eigenvalues();
  r.weights = es.eigenvectors().row(0).transpose().array().square();
  r.weights /= r.weights.sum();
  // the rule is symmetric; enforce it exactly to avoid O(eps) odd-moment drift
  for (int k = 0; k < n / 2; ++k) {
    double x = 0.5 * (r.nodes(n - 1 - k) - r.nodes(k));
    double w = 0.5 * (r.weights(n - 1 - k) + r.weights(k));
    r.nodes(k) = -x;
    r.nodes(n - 1 - k) = x;
    r.weights(k) = r.weights(n - 1 - k) = w;
  }
  if (n % 2 == 1) r.nodes(n / 2) = 0.0;
  return r;
}

double hermite_offdiag(int k) { return std::sqrt(static_cast<double>(k)); }
double legendre_offdiag(int k) { return k / std::sqrt(4.0 * k * k - 1.0); }

template <class Build>
const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& cache, std::mutex& mu, int n,
                             Build build) {
  if (n < 1) throw ConfigError("quadrature needs at least one node");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(build(n));
  return *slot;
}

} // namespace

const QuadratureRule& gauss_hermite(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [](int k) { return golub_welsch(k, hermite_offdiag); });
}

const QuadratureRule& gauss_legendre_unit(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [](int k) {
    QuadratureRule r = golub_welsch(k, legendre_offdiag);
    r.nodes = (r.nodes.array() + 1.0) * 0.5;
    return r;
  });
}

} // namespace gdse
