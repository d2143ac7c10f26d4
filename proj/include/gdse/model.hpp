#pragma once

#include "gdse/quadrature.hpp"
#include "gdse/types.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>

namespace gdse {

/// Scalar link with derivatives up to order four. `eval(x, order, out)`
/// writes phi(x), phi'(x), ..., phi^(order)(x) into out[0..order].
struct LinkFunction {
  std::string name;
  std::function<void(double, int, double*)> eval;

  double operator()(double x) const {
    double v;
    eval(x, 0, &v);
    return v;
  }
  double derivative(int k, double x) const {
    std::array<double, 5> d{};
    eval(x, k, d.data());
    return d[static_cast<std::size_t>(k)];
  }

  static LinkFunction identity();
  static LinkFunction sigmoid();
  static LinkFunction x_plus_sin();
  static LinkFunction quad_plus_linear();
  static LinkFunction square();
};

/// Parses "identity", "sigmoid", "x_plus_sin", "quad_plus_linear", "square".
LinkFunction parse_link(std::string_view name);

enum class NoiseLaw { Zero, Gaussian, Custom };

/// Noise law. The default "population" mode integrates over the law; a noise
/// built with `empirical` averages over a realised vector instead.
struct NoiseSpec {
  NoiseLaw law = NoiseLaw::Zero;
  double mean = 0.0;
  double sigma = 0.0;
  std::function<double(std::mt19937_64&)> sampler;
  std::shared_ptr<const Vector> realized;

  static NoiseSpec zero() { return {}; }
  static NoiseSpec gaussian(double sigma, double mean = 0.0);
  static NoiseSpec custom(std::function<double(std::mt19937_64&)> sampler, double mean);
  static NoiseSpec empirical(Vector xi);

  bool is_zero() const { return law == NoiseLaw::Zero && !realized; }
  double sample(std::mt19937_64& rng) const;
};

enum class Partial { S, D1, D2, D11, D12, D22, D111, D112, D122 };

/// Callbacks defining a custom loss. `score` is the composite
/// S(x, z, xi) = d/dx L(x, F(z, xi)); missing partials fall back to
/// central finite differences.
struct ScoreFunctions {
  using Fn3 = std::function<double(double, double, double)>;
  Fn3 score;
  std::array<Fn3, 9> partials{}; // indexed by Partial, entry 0 unused
  std::function<double(double, double)> loss_grad;
  std::function<double(double, double)> loss_hess;
  std::function<double(double, double)> response;
  bool affine_in_noise = false;
};

enum class LossKind { SquaredOnLink, CustomScore };

class ModelSpec {
public:
  static ModelSpec squared_on_link(LinkFunction link, NoiseSpec noise = NoiseSpec::zero());
  static ModelSpec custom_score(std::string name, ScoreFunctions fns, NoiseSpec noise = NoiseSpec::zero());

  LossKind loss() const { return loss_; }
  const std::string& name() const { return name_; }
  const LinkFunction* link() const { return loss_ == LossKind::SquaredOnLink ? &link_ : nullptr; }
  const NoiseSpec& noise() const { return noise_; }
  bool affine_in_noise() const { return affine_; }

  ModelSpec with_noise(NoiseSpec noise) const;

  double score(Partial p, double x, double z, double xi) const;
  /// d/dx L(x, y) and its x-derivative.
  double loss_grad(double x, double y) const;
  double loss_hess(double x, double y) const;
  /// Y = F(z, xi).
  double response(double z, double xi) const;

private:
  double fd_partial(Partial p, double x, double z, double xi) const;

  LossKind loss_ = LossKind::SquaredOnLink;
  std::string name_;
  LinkFunction link_;
  std::shared_ptr<const ScoreFunctions> custom_;
  NoiseSpec noise_;
  bool affine_ = true;
};

/// Covariance of (<Z,u>, <Z,mu*>) for Z ~ N(0, I).
struct GaussianPairCov {
  double gamma2 = 1.0;
  double alpha = 0.0;
  double s2 = 1.0;

  bool psd(double rel_tol = 1e-12) const { return gamma2 * s2 - alpha * alpha >= -rel_tol * gamma2 * s2; }
  /// Correlation clipped to [-1, 1]; negative variances rejected.
  GaussianPairCov projected() const;
};

inline constexpr int kDefaultNodes = 60;

/// Discretisation of the noise law used inside an expectation.
struct NoisePoints {
  std::vector<double> values;
  std::vector<double> weights;
};
NoisePoints noise_points(const NoiseSpec& noise, int nodes, bool affine_in_noise);

/// Tensorised Gauss-Hermite approximation of E f(G1, G2, xi) with
/// (G1, G2) ~ N(0, cov) and xi independent with the given law.
template <class F>
double gauss2_expect(F&& f, const GaussianPairCov& cov, const NoiseSpec& noise, int nodes = kDefaultNodes,
                     bool affine_in_noise = false) {
  if (nodes < 2) throw ConfigError("gauss2_expect needs at least two nodes");
  const GaussianPairCov c = cov.projected();
  const QuadratureRule& q = gauss_hermite(nodes);
  const NoisePoints np = noise_points(noise, nodes, affine_in_noise);

  // G2 = s z2, G1 = (alpha / s) z2 + r z1
  const double s = std::sqrt(c.s2);
  double a = 0.0, r = std::sqrt(c.gamma2);
  if (s > 0.0) {
    a = c.alpha / s;
    r = std::sqrt(std::max(0.0, c.gamma2 - a * a));
  }
  const bool one_d = r == 0.0 || s == 0.0;

  double total = 0.0;
  for (std::size_t k = 0; k < np.values.size(); ++k) {
    const double xi = np.values[k];
    double acc = 0.0;
    if (one_d) {
      for (Index j = 0; j < q.nodes.size(); ++j) {
        const double z = q.nodes(j);
        acc += q.weights(j) * (s > 0.0 ? f(a * z, s * z, xi) : f(r * z, 0.0, xi));
      }
    } else {
      for (Index j = 0; j < q.nodes.size(); ++j) {
        const double z2 = q.nodes(j);
        double inner = 0.0;
        for (Index i = 0; i < q.nodes.size(); ++i) inner += q.weights(i) * f(a * z2 + r * q.nodes(i), s * z2, xi);
        acc += q.weights(j) * inner;
      }
    }
    total += np.weights[k] * acc;
  }
  return total;
}

/// One-dimensional analogue: E f(G, xi) with G ~ N(0, var).
template <class F>
double gauss1_expect(F&& f, double var, const NoiseSpec& noise, int nodes = kDefaultNodes,
                     bool affine_in_noise = false) {
  const QuadratureRule& q = gauss_hermite(nodes);
  const NoisePoints np = noise_points(noise, nodes, affine_in_noise);
  const double sd = std::sqrt(std::max(0.0, var));
  double total = 0.0;
  for (std::size_t k = 0; k < np.values.size(); ++k) {
    double acc = 0.0;
    for (Index j = 0; j < q.nodes.size(); ++j) acc += q.weights(j) * f(sd * q.nodes(j), np.values[k]);
    total += np.weights[k] * acc;
  }
  return total;
}

struct TauDelta {
  double tau = 0.0;
  double delta = 0.0;
};

/// tau = E d1 S(G1, G2, xi), delta = -E d2 S(G1, G2, xi).
TauDelta tau_delta(const ModelSpec& model, const GaussianPairCov& cov, int nodes = kDefaultNodes);

/// min{ E d1 S(sG, sG, xi), E G^2 d1 S(sG, sG, xi) } with s = |mu*|.
double rho_star(const ModelSpec& model, double mu_star_norm, int nodes = kDefaultNodes);

/// kappa(z) = inf_{|x| <= z} |phi'(x)| on a uniform grid.
double kappa_link(const LinkFunction& link, double z, int grid = 1000);
/// kappa_* = kappa(6 (1 + |mu0|))^2.
double kappa_star(const LinkFunction& link, double mu0_norm, int grid = 1000);

} // namespace gdse
