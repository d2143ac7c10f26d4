#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gdse/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace gdse {

/// Largest singular value. Small problems use a dense decomposition; larger
/// ones run power iteration on A^T A to the given relative tolerance.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-10,
                                       Eigen::Index dense_limit = 200, int max_iter = 10000) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (a.size() == 0) return Scalar(0);
  const Mat m = a;
  if (std::min(m.rows(), m.cols()) <= dense_limit) {
    if (m.rows() == m.cols() && m.isApprox(m.transpose(), Scalar(0))) {
      Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
  }
  std::mt19937_64 rng(0xC0FFEEULL);
  std::normal_distribution<double> nd;
  Vec x(m.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = Scalar(nd(rng));
  x.normalize();
  Scalar lambda(0);
  for (int it = 0; it < max_iter; ++it) {
    Vec y = m.transpose() * (m * x);
    const Scalar next = y.norm();
    if (next == Scalar(0)) return Scalar(0);
    x = y / next;
    if (std::abs(next - lambda) <= rel_tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

/// Spectrum of c0 I + c11 uu^T + c12 (uv^T + vu^T) + c22 vv^T in R^n:
/// n - 2 copies of the bulk value c0 plus two extremes from span(u, v).
template <typename Scalar>
struct Rank2Spectrum {
  Scalar bulk{};
  Scalar lo{};
  Scalar hi{};
  Eigen::Index n = 0;

  Scalar min() const { return n > 2 ? std::min(lo, bulk) : lo; }
  Scalar max() const { return n > 2 ? std::max(hi, bulk) : hi; }

  /// Sorted multiset of all n eigenvalues.
  std::vector<Scalar> expand() const {
    std::vector<Scalar> e(static_cast<std::size_t>(std::max<Eigen::Index>(n - 2, 0)), bulk);
    e.push_back(lo);
    e.push_back(hi);
    std::sort(e.begin(), e.end());
    return e;
  }
};

template <typename Scalar>
Rank2Spectrum<Scalar> symmetric2_eigs(Scalar b11, Scalar b12, Scalar b22) {
  const Scalar mid = (b11 + b22) / 2;
  const Scalar rad = std::hypot((b11 - b22) / 2, b12);
  Rank2Spectrum<Scalar> r;
  r.lo = mid - rad;
  r.hi = mid + rad;
  return r;
}

template <typename DerivedU, typename DerivedV>
Rank2Spectrum<typename DerivedU::Scalar> rank2_eigs(typename DerivedU::Scalar c0, typename DerivedU::Scalar c11,
                                                    typename DerivedU::Scalar c12, typename DerivedU::Scalar c22,
                                                    const Eigen::MatrixBase<DerivedU>& u,
                                                    const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size() || u.size() < 2) throw ConfigError("rank2_eigs: need u, v of equal size >= 2");
  const Scalar nu = u.norm();
  Rank2Spectrum<Scalar> r;
  if (nu == Scalar(0)) {
    // only the vv^T term survives
    r = symmetric2_eigs<Scalar>(c0 + c22 * v.squaredNorm(), Scalar(0), c0);
  } else {
    // e1 = u/|u|, v = g e1 + s e2
    const Scalar g = u.dot(v) / nu;
    Scalar s = std::sqrt(std::max(Scalar(0), v.squaredNorm() - g * g));
    if (s <= Scalar(1e-14) * std::max(v.norm(), Scalar(1))) s = Scalar(0);
    const Scalar b11 = c0 + c11 * nu * nu + 2 * c12 * nu * g + c22 * g * g;
    const Scalar b12 = c12 * nu * s + c22 * g * s;
    const Scalar b22 = c0 + c22 * s * s;
    r = symmetric2_eigs<Scalar>(b11, b12, b22);
  }
  r.bulk = c0;
  r.n = u.size();
  return r;
}

/// 1 + max_{tau <= t} sum_{s <= tau} prod_{r = s..tau} |I - eta_r M_r|_op.
template <typename MatrixType>
double product_norm_diag(const std::vector<MatrixType>& matrices, const std::vector<double>& etas) {
  if (matrices.size() != etas.size()) throw ConfigError("product_norm_diag: size mismatch");
  double best = 0.0, running = 0.0;
  for (std::size_t r = 0; r < matrices.size(); ++r) {
    const auto& m = matrices[r];
    if (m.rows() != m.cols() || m.rows() != matrices.front().rows())
      throw ConfigError("product_norm_diag: matrices must be square and equal-sized");
    MatrixType f = -etas[r] * m;
    f.diagonal().array() += 1.0;
    // S_tau = (S_{tau-1} + 1) * |I - eta_tau M_tau|
    running = (running + 1.0) * static_cast<double>(operator_norm(f));
    best = std::max(best, running);
  }
  return 1.0 + best;
}

} // namespace gdse
