#pragma once

#include "gdse/types.hpp"

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>

namespace gdse {

enum class DesignTag { Gaussian, Rademacher, StdExponential, Custom };

/// User-supplied entry law. The declared moments are part of the contract:
/// mean must be 0 and variance 1; the third moment is reported, not checked.
struct CustomSampler {
  std::string name;
  std::function<double(std::mt19937_64&)> draw;
  double mean = 0.0;
  double variance = 1.0;
  double third_moment = 0.0;
};

struct DesignKind {
  DesignTag tag = DesignTag::Gaussian;
  std::shared_ptr<const CustomSampler> custom;

  static DesignKind gaussian() { return {DesignTag::Gaussian, nullptr}; }
  static DesignKind rademacher() { return {DesignTag::Rademacher, nullptr}; }
  static DesignKind std_exponential() { return {DesignTag::StdExponential, nullptr}; }
  static DesignKind from_custom(CustomSampler s);

  std::string name() const;
  double third_moment() const;
};

/// Parses "gaussian", "rademacher", "std_exponential" or "custom:<name>"
/// (the latter looked up in the registry below).
DesignKind parse_design_kind(std::string_view name);
void register_custom_design(CustomSampler s);

/// Fills a buffer with i.i.d. entries of the given law.
void draw_entries(const DesignKind& kind, std::mt19937_64& rng, double* out, Index count);

struct DesignMatrix {
  RowMatrix entries;
  DesignKind kind;
  std::uint64_t seed = 0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
  double aspect_ratio() const { return static_cast<double>(rows()) / static_cast<double>(cols()); }
};

inline constexpr Index kDefaultMaxEntries = 100000000;

DesignMatrix sample_design(const DesignKind& kind, Index m, Index n, std::uint64_t seed,
                           Index max_entries = kDefaultMaxEntries);

/// Pooled raw moment E x^order of all entries (about the population mean 0).
double empirical_moments(const DesignMatrix& x, int order);

} // namespace gdse
