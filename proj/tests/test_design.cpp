#include "gdse/design.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace gdse;

TEST_CASE("rademacher entries are signs") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const DesignMatrix x = sample_design(DesignKind::rademacher(), 4, 4, seed);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) CHECK(std::abs(x.entries(i, j)) == 1.0);
  }
}

TEST_CASE("std exponential moments") {
  const DesignMatrix x = sample_design(DesignKind::std_exponential(), 1000, 100, 7);
  const double n = 1e5;
  CHECK(std::abs(empirical_moments(x, 1)) < 4e-2);
  const double mean = empirical_moments(x, 1);
  CHECK(std::abs(empirical_moments(x, 2) - mean * mean - 1.0) < 4e-2);
  // E(E-1)^6 = 265, so the third-moment estimate has sd sqrt(265 - 4)/sqrt(N)
  CHECK(std::abs(empirical_moments(x, 3) - 2.0) < 3.0 * std::sqrt(261.0 / n));
  CHECK(DesignKind::std_exponential().third_moment() == 2.0);
}

TEST_CASE("empirical moments of rademacher and gaussian") {
  const DesignMatrix r = sample_design(DesignKind::rademacher(), 300, 40, 3);
  CHECK(empirical_moments(r, 2) == 1.0);
  CHECK(empirical_moments(r, 4) == 1.0);
  CHECK(std::abs(empirical_moments(r, 3)) <= 4.0 / std::sqrt(300.0 * 40.0));

  const DesignMatrix g = sample_design(DesignKind::gaussian(), 500, 40, 4);
  CHECK(std::abs(empirical_moments(g, 4) - 3.0) <= 10.0 / std::sqrt(500.0 * 40.0));
  CHECK_THROWS_AS(empirical_moments(g, 5), ConfigError);
}

TEST_CASE("pooled moments of a million entries within five standard errors") {
  struct Case {
    DesignKind kind;
    double m3, m4, m6;
  };
  // raw moments of each law: third, fourth and sixth (for the sd of the third)
  const Case cases[] = {{DesignKind::gaussian(), 0.0, 3.0, 15.0},
                        {DesignKind::rademacher(), 0.0, 1.0, 1.0},
                        {DesignKind::std_exponential(), 2.0, 9.0, 265.0}};
  for (const auto& c : cases) {
    const DesignMatrix x = sample_design(c.kind, 1000, 1000, 11);
    const double n = 1e6;
    CHECK(std::abs(empirical_moments(x, 1)) < 5.0 / std::sqrt(n));
    CHECK(std::abs(empirical_moments(x, 2) - 1.0) < 5.0 * std::sqrt((c.m4 - 1.0) / n) + 1e-15);
    CHECK(std::abs(empirical_moments(x, 3) - c.m3) < 5.0 * std::sqrt((c.m6 - c.m3 * c.m3) / n));
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  for (auto kind : {DesignKind::gaussian(), DesignKind::rademacher(), DesignKind::std_exponential()}) {
    const DesignMatrix a = sample_design(kind, 37, 11, 123);
    const DesignMatrix b = sample_design(kind, 37, 11, 123);
    const DesignMatrix c = sample_design(kind, 37, 11, 124);
    CHECK(std::memcmp(a.entries.data(), b.entries.data(), sizeof(double) * 37 * 11) == 0);
    CHECK((a.entries - c.entries).norm() > 0.0);
    CHECK(a.aspect_ratio() == doctest::Approx(37.0 / 11.0));
  }
}

TEST_CASE("storage is row-major by sample") {
  const DesignMatrix x = sample_design(DesignKind::gaussian(), 3, 5, 1);
  CHECK(x.entries.data()[1] == x.entries(0, 1));
  CHECK(x.entries.data()[5] == x.entries(1, 0));
}

TEST_CASE("replication seeds") {
  CHECK(replication_seed(5, 0) == 5);
  CHECK(replication_seed(5, 1) == (5ULL ^ 0x9E3779B97F4A7C15ULL));
  CHECK(replication_seed(5, 2) != replication_seed(5, 1));
}

TEST_CASE("custom designs") {
  CustomSampler bad;
  bad.name = "shifted";
  bad.draw = [](std::mt19937_64& rng) { return std::normal_distribution<double>(1.0, 1.0)(rng); };
  bad.mean = 1.0;
  CHECK_THROWS_AS(DesignKind::from_custom(bad), ConfigError);
  bad.mean = 0.0;
  bad.variance = 2.0;
  CHECK_THROWS_AS(register_custom_design(bad), ConfigError);

  CustomSampler three;
  three.name = "three_point";
  // +-sqrt(3/2) with prob 1/3 each, 0 with prob 1/3: mean 0, variance 1
  three.draw = [](std::mt19937_64& rng) {
    const auto k = rng() % 3;
    return k == 0 ? 0.0 : (k == 1 ? 1.0 : -1.0) * std::sqrt(1.5);
  };
  register_custom_design(three);
  const DesignKind kind = parse_design_kind("custom:three_point");
  CHECK(kind.name() == "custom:three_point");
  const DesignMatrix x = sample_design(kind, 200, 50, 2);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      const double v = std::abs(x.entries(i, j));
      CHECK((v == 0.0 || std::abs(v - std::sqrt(1.5)) < 1e-15));
    }
  CHECK(std::abs(empirical_moments(x, 2) - 1.0) < 5.0 * std::sqrt(0.5 / 1e4));
  CHECK_THROWS_AS(parse_design_kind("custom:missing"), ConfigError);
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(parse_design_kind("cauchy"), ConfigError);
  CHECK_THROWS_AS(sample_design(DesignKind::gaussian(), 0, 3, 1), ConfigError);
  CHECK_THROWS_AS(sample_design(DesignKind::gaussian(), 1000, 1000, 1, 10000), ConfigError);
}
