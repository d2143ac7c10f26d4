#include "gdse/model.hpp"

#include <algorithm>

namespace gdse {

namespace {

void identity_eval(double x, int order, double* d) {
  d[0] = x;
  for (int k = 1; k <= order; ++k) d[k] = k == 1 ? 1.0 : 0.0;
}

void sigmoid_eval(double x, int order, double* d) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  d[0] = s;
  if (order < 1) return;
  const double v = s * (1.0 - s);
  d[1] = v;
  if (order < 2) return;
  d[2] = v * (1.0 - 2.0 * s);
  if (order < 3) return;
  d[3] = v * (1.0 - 6.0 * s + 6.0 * s * s);
  if (order < 4) return;
  d[4] = v * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s);
}

void x_plus_sin_eval(double x, int order, double* d) {
  const double sn = std::sin(x), cs = std::cos(x);
  d[0] = x + sn;
  if (order >= 1) d[1] = 1.0 + cs;
  if (order >= 2) d[2] = -sn;
  if (order >= 3) d[3] = -cs;
  if (order >= 4) d[4] = sn;
}

void quad_plus_linear_eval(double x, int order, double* d) {
  d[0] = x * x + 2.0 * x;
  if (order >= 1) d[1] = 2.0 * x + 2.0;
  if (order >= 2) d[2] = 2.0;
  for (int k = 3; k <= order; ++k) d[k] = 0.0;
}

void square_eval(double x, int order, double* d) {
  d[0] = x * x;
  if (order >= 1) d[1] = 2.0 * x;
  if (order >= 2) d[2] = 2.0;
  for (int k = 3; k <= order; ++k) d[k] = 0.0;
}

constexpr double kFdStep = 1e-4;

} // namespace

LinkFunction LinkFunction::identity() { return {"identity", identity_eval}; }
LinkFunction LinkFunction::sigmoid() { return {"sigmoid", sigmoid_eval}; }
LinkFunction LinkFunction::x_plus_sin() { return {"x_plus_sin", x_plus_sin_eval}; }
LinkFunction LinkFunction::quad_plus_linear() { return {"quad_plus_linear", quad_plus_linear_eval}; }
LinkFunction LinkFunction::square() { return {"square", square_eval}; }

LinkFunction parse_link(std::string_view name) {
  if (name == "identity") return LinkFunction::identity();
  if (name == "sigmoid") return LinkFunction::sigmoid();
  if (name == "x_plus_sin") return LinkFunction::x_plus_sin();
  if (name == "quad_plus_linear") return LinkFunction::quad_plus_linear();
  if (name == "square") return LinkFunction::square();
  throw ConfigError("unknown link '" + std::string(name) + "'");
}

NoiseSpec NoiseSpec::gaussian(double sigma, double mean) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
  NoiseSpec n;
  n.law = sigma == 0.0 && mean == 0.0 ? NoiseLaw::Zero : NoiseLaw::Gaussian;
  n.sigma = sigma;
  n.mean = mean;
  return n;
}

NoiseSpec NoiseSpec::custom(std::function<double(std::mt19937_64&)> sampler, double mean) {
  if (!sampler) throw ConfigError("custom noise without sampler");
  NoiseSpec n;
  n.law = NoiseLaw::Custom;
  n.sampler = std::move(sampler);
  n.mean = mean;
  return n;
}

NoiseSpec NoiseSpec::empirical(Vector xi) {
  if (xi.size() == 0) throw ConfigError("empirical noise needs at least one value");
  NoiseSpec n;
  n.law = NoiseLaw::Custom;
  n.mean = xi.mean();
  n.realized = std::make_shared<const Vector>(std::move(xi));
  return n;
}

double NoiseSpec::sample(std::mt19937_64& rng) const {
  if (realized) {
    std::uniform_int_distribution<Index> pick(0, realized->size() - 1);
    return (*realized)(pick(rng));
  }
  switch (law) {
  case NoiseLaw::Zero: return 0.0;
  case NoiseLaw::Gaussian: {
    std::normal_distribution<double> d(mean, sigma);
    return d(rng);
  }
  case NoiseLaw::Custom: return sampler(rng);
  }
  return 0.0;
}

NoisePoints noise_points(const NoiseSpec& noise, int nodes, bool affine_in_noise) {
  NoisePoints p;
  if (noise.is_zero()) {
    p.values = {0.0};
    p.weights = {1.0};
  } else if (affine_in_noise) {
    p.values = {noise.mean};
    p.weights = {1.0};
  } else if (noise.realized) {
    const Vector& xi = *noise.realized;
    p.values.assign(xi.data(), xi.data() + xi.size());
    p.weights.assign(static_cast<std::size_t>(xi.size()), 1.0 / static_cast<double>(xi.size()));
  } else if (noise.law == NoiseLaw::Gaussian) {
    const QuadratureRule& q = gauss_hermite(nodes);
    for (Index j = 0; j < q.nodes.size(); ++j) {
      p.values.push_back(noise.mean + noise.sigma * q.nodes(j));
      p.weights.push_back(q.weights(j));
    }
  } else {
    // no structure to exploit: fixed-seed Monte Carlo
    constexpr int draws = 4096;
    std::mt19937_64 rng(0x5EEDULL);
    for (int k = 0; k < draws; ++k) p.values.push_back(noise.sampler(rng));
    p.weights.assign(draws, 1.0 / draws);
  }
  return p;
}

ModelSpec ModelSpec::squared_on_link(LinkFunction link, NoiseSpec noise) {
  if (!link.eval) throw ConfigError("link function without evaluator");
  ModelSpec m;
  m.loss_ = LossKind::SquaredOnLink;
  m.name_ = link.name;
  m.link_ = std::move(link);
  m.noise_ = std::move(noise);
  m.affine_ = true;
  return m;
}

ModelSpec ModelSpec::custom_score(std::string name, ScoreFunctions fns, NoiseSpec noise) {
  if (!fns.score) throw ConfigError("custom score without S");
  if (!fns.response) throw ConfigError("custom score without response map");
  if (!fns.loss_grad) {
    // the score at (x, F(z, xi)) is the gradient; without a direct form the
    // empirical iteration cannot run
    throw ConfigError("custom score without loss gradient");
  }
  ModelSpec m;
  m.loss_ = LossKind::CustomScore;
  m.name_ = std::move(name);
  m.affine_ = fns.affine_in_noise;
  m.custom_ = std::make_shared<const ScoreFunctions>(std::move(fns));
  m.noise_ = std::move(noise);
  return m;
}

ModelSpec ModelSpec::with_noise(NoiseSpec noise) const {
  ModelSpec m = *this;
  m.noise_ = std::move(noise);
  return m;
}

double ModelSpec::score(Partial p, double x, double z, double xi) const {
  if (loss_ == LossKind::CustomScore) {
    const auto& fn = custom_->partials[static_cast<std::size_t>(p)];
    if (p == Partial::S) return custom_->score(x, z, xi);
    if (fn) return fn(x, z, xi);
    return fd_partial(p, x, z, xi);
  }
  std::array<double, 5> dx{}, dz{};
  switch (p) {
  case Partial::S:
    link_.eval(x, 1, dx.data());
    dz[0] = link_(z);
    return (dx[0] - dz[0] - xi) * dx[1];
  case Partial::D1:
    link_.eval(x, 2, dx.data());
    dz[0] = link_(z);
    return dx[1] * dx[1] + (dx[0] - dz[0] - xi) * dx[2];
  case Partial::D2:
    return -link_.derivative(1, x) * link_.derivative(1, z);
  case Partial::D11:
    link_.eval(x, 3, dx.data());
    dz[0] = link_(z);
    return 3.0 * dx[1] * dx[2] + (dx[0] - dz[0] - xi) * dx[3];
  case Partial::D12:
    return -link_.derivative(1, z) * link_.derivative(2, x);
  case Partial::D22:
    return -link_.derivative(2, z) * link_.derivative(1, x);
  case Partial::D111:
    link_.eval(x, 4, dx.data());
    dz[0] = link_(z);
    return 3.0 * dx[2] * dx[2] + 4.0 * dx[1] * dx[3] + (dx[0] - dz[0] - xi) * dx[4];
  case Partial::D112:
    return -link_.derivative(1, z) * link_.derivative(3, x);
  case Partial::D122:
    return -link_.derivative(2, z) * link_.derivative(2, x);
  }
  return 0.0;
}

double ModelSpec::fd_partial(Partial p, double x, double z, double xi) const {
  const double h = kFdStep;
  auto dx = [&](Partial base) { return (score(base, x + h, z, xi) - score(base, x - h, z, xi)) / (2.0 * h); };
  auto dz = [&](Partial base) { return (score(base, x, z + h, xi) - score(base, x, z - h, xi)) / (2.0 * h); };
  switch (p) {
  case Partial::D1: return dx(Partial::S);
  case Partial::D2: return dz(Partial::S);
  case Partial::D11: return dx(Partial::D1);
  case Partial::D12: return dz(Partial::D1);
  case Partial::D22: return dz(Partial::D2);
  case Partial::D111: return dx(Partial::D11);
  case Partial::D112: return dz(Partial::D11);
  case Partial::D122: return dz(Partial::D12);
  default: return score(Partial::S, x, z, xi);
  }
}

double ModelSpec::loss_grad(double x, double y) const {
  if (loss_ == LossKind::CustomScore) return custom_->loss_grad(x, y);
  std::array<double, 5> d{};
  link_.eval(x, 1, d.data());
  return (d[0] - y) * d[1];
}

double ModelSpec::loss_hess(double x, double y) const {
  if (loss_ == LossKind::CustomScore) {
    if (custom_->loss_hess) return custom_->loss_hess(x, y);
    const double h = kFdStep;
    return (custom_->loss_grad(x + h, y) - custom_->loss_grad(x - h, y)) / (2.0 * h);
  }
  std::array<double, 5> d{};
  link_.eval(x, 2, d.data());
  return d[1] * d[1] + (d[0] - y) * d[2];
}

double ModelSpec::response(double z, double xi) const {
  if (loss_ == LossKind::CustomScore) return custom_->response(z, xi);
  return link_(z) + xi;
}

GaussianPairCov GaussianPairCov::projected() const {
  if (gamma2 < 0.0 || s2 < 0.0 || !std::isfinite(gamma2) || !std::isfinite(s2) || !std::isfinite(alpha))
    throw NumericError("invalid Gaussian pair covariance");
  GaussianPairCov c = *this;
  const double bound = std::sqrt(gamma2 * s2);
  c.alpha = std::clamp(alpha, -bound, bound);
  return c;
}

TauDelta tau_delta(const ModelSpec& model, const GaussianPairCov& cov, int nodes) {
  const NoiseSpec& noise = model.noise();
  const bool affine = model.affine_in_noise();
  TauDelta r;
  r.tau = gauss2_expect([&](double g1, double g2, double xi) { return model.score(Partial::D1, g1, g2, xi); }, cov,
                        noise, nodes, affine);
  r.delta = -gauss2_expect([&](double g1, double g2, double xi) { return model.score(Partial::D2, g1, g2, xi); },
                           cov, noise, nodes, affine);
  if (!std::isfinite(r.tau) || !std::isfinite(r.delta)) throw NumericError("non-finite tau/delta");
  return r;
}

double rho_star(const ModelSpec& model, double mu_star_norm, int nodes) {
  if (!(mu_star_norm > 0.0)) throw ConfigError("rho_star needs a positive signal norm");
  const double s = mu_star_norm;
  const NoiseSpec& noise = model.noise();
  const bool affine = model.affine_in_noise();
  // integrate in the standard variable so the G^2 weight stays exact
  const double e0 = gauss1_expect([&](double z, double xi) { return model.score(Partial::D1, s * z, s * z, xi); },
                                  1.0, noise, nodes, affine);
  const double e2 = gauss1_expect(
      [&](double z, double xi) { return z * z * model.score(Partial::D1, s * z, s * z, xi); }, 1.0, noise, nodes,
      affine);
  return std::min(e0, e2);
}

double kappa_link(const LinkFunction& link, double z, int grid) {
  if (grid < 2) throw ConfigError("kappa grid needs at least two points");
  double best = std::abs(link.derivative(1, 0.0));
  for (int k = 0; k < grid; ++k) {
    const double x = -z + 2.0 * z * k / (grid - 1);
    best = std::min(best, std::abs(link.derivative(1, x)));
  }
  return best;
}

double kappa_star(const LinkFunction& link, double mu0_norm, int grid) {
  const double k = kappa_link(link, 6.0 * (1.0 + mu0_norm), grid);
  return k * k;
}

} // namespace gdse
