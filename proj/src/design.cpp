#include "gdse/design.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace gdse {

namespace {

std::mutex registry_mutex;

std::map<std::string, std::shared_ptr<const CustomSampler>>& registry() {
  static std::map<std::string, std::shared_ptr<const CustomSampler>> r;
  return r;
}

void check_custom(const CustomSampler& s) {
  if (!s.draw) throw ConfigError("custom design '" + s.name + "' has no sampler");
  if (std::abs(s.mean) > 1e-12 || std::abs(s.variance - 1.0) > 1e-12)
    throw ConfigError("custom design '" + s.name + "' must declare mean 0 and variance 1");
}

} // namespace

DesignKind DesignKind::from_custom(CustomSampler s) {
  check_custom(s);
  return {DesignTag::Custom, std::make_shared<const CustomSampler>(std::move(s))};
}

std::string DesignKind::name() const {
  switch (tag) {
  case DesignTag::Gaussian: return "gaussian";
  case DesignTag::Rademacher: return "rademacher";
  case DesignTag::StdExponential: return "std_exponential";
  case DesignTag::Custom: return "custom:" + (custom ? custom->name : std::string("?"));
  }
  return "?";
}

double DesignKind::third_moment() const {
  switch (tag) {
  case DesignTag::Gaussian:
  case DesignTag::Rademacher: return 0.0;
  case DesignTag::StdExponential: return 2.0;
  case DesignTag::Custom: return custom ? custom->third_moment : 0.0;
  }
  return 0.0;
}

void register_custom_design(CustomSampler s) {
  check_custom(s);
  std::lock_guard<std::mutex> lock(registry_mutex);
  auto name = s.name;
  registry()[name] = std::make_shared<const CustomSampler>(std::move(s));
}

DesignKind parse_design_kind(std::string_view name) {
  if (name == "gaussian") return DesignKind::gaussian();
  if (name == "rademacher") return DesignKind::rademacher();
  if (name == "std_exponential") return DesignKind::std_exponential();
  if (name.substr(0, 7) == "custom:") {
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto it = registry().find(std::string(name.substr(7)));
    if (it == registry().end()) throw ConfigError("unknown custom design '" + std::string(name) + "'");
    return {DesignTag::Custom, it->second};
  }
  throw ConfigError("unknown design kind '" + std::string(name) + "'");
}

void draw_entries(const DesignKind& kind, std::mt19937_64& rng, double* out, Index count) {
  switch (kind.tag) {
  case DesignTag::Gaussian: {
    std::normal_distribution<double> d;
    for (Index k = 0; k < count; ++k) out[k] = d(rng);
    break;
  }
  case DesignTag::Rademacher: {
    // one 64-bit draw feeds 64 signs
    Index k = 0;
    while (k < count) {
      std::uint64_t bits = rng();
      for (int b = 0; b < 64 && k < count; ++b, ++k) out[k] = (bits >> b) & 1u ? 1.0 : -1.0;
    }
    break;
  }
  case DesignTag::StdExponential: {
    std::exponential_distribution<double> d(1.0);
    for (Index k = 0; k < count; ++k) out[k] = d(rng) - 1.0;
    break;
  }
  case DesignTag::Custom: {
    if (!kind.custom) throw ConfigError("custom design without sampler");
    for (Index k = 0; k < count; ++k) out[k] = kind.custom->draw(rng);
    break;
  }
  }
}

DesignMatrix sample_design(const DesignKind& kind, Index m, Index n, std::uint64_t seed, Index max_entries) {
  if (m < 1 || n < 1) throw ConfigError("design dimensions must be positive");
  if (m > max_entries / n) throw ConfigError("design of " + std::to_string(m) + "x" + std::to_string(n) +
                                             " exceeds the entry cap");
  if (kind.tag == DesignTag::Custom) {
    if (!kind.custom) throw ConfigError("custom design without sampler");
    check_custom(*kind.custom);
  }
  DesignMatrix x;
  x.kind = kind;
  x.seed = seed;
  x.entries.resize(m, n);
  std::mt19937_64 rng(seed);
  draw_entries(kind, rng, x.entries.data(), m * n);
  return x;
}

double empirical_moments(const DesignMatrix& x, int order) {
  if (order < 1 || order > 4) throw ConfigError("moment order must be in 1..4");
  const auto a = x.entries.array();
  switch (order) {
  case 1: return a.mean();
  case 2: return a.square().mean();
  case 3: return a.cube().mean();
  default: return a.square().square().mean();
  }
}

} // namespace gdse
