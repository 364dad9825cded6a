#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hetcache/errors.hpp"
#include "hetcache/model.hpp"
#include "oracles.hpp"

using namespace hetcache;

namespace {

bool has(const std::vector<Violation>& v, const std::string& constraint) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.constraint == constraint; });
}

CachingPolicy feasible_policy(const NetworkConfig& c) {
  CachingPolicy p(c.n_files(), c.n_tiers());
  for (int k = 0; k < c.n_tiers(); ++k) {
    for (int n = 0; n < c.tiers[static_cast<std::size_t>(k)].cache_size; ++n) p(n, k) = 1.0;
  }
  return p;
}

}  // namespace

TEST(Catalog, ZipfIsNormalizedAndNonIncreasing) {
  for (double g : {0.0, 0.2, 0.8, 1.4}) {
    const auto cat = Catalog::zipf(50, g);
    const auto a = cat.popularity();
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-14);
    EXPECT_TRUE(std::is_sorted(a.rbegin(), a.rend()));
    EXPECT_NEAR(a[0] / a[9], std::pow(10.0, g), 1e-12);
    EXPECT_EQ(cat.zipf_gamma(), g);
  }
}

TEST(TierWeights, MatchDirectFormula) {
  const auto c = oracle::reference_network();
  const auto z = tier_weights(c);
  const auto want = oracle::z(c);
  ASSERT_EQ(z.size(), 2u);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z[k], want[k], 1e-15);
  EXPECT_NEAR(z[0] + z[1], 1.0, 1e-15);
}

TEST(TierWeights, ScaleInvariant) {
  auto c = oracle::reference_network();
  const auto z0 = tier_weights(c);
  for (auto& t : c.tiers) {
    t.density *= 7.0;
    t.power *= 3.0;
  }
  const auto z1 = tier_weights(c);
  for (std::size_t k = 0; k < z0.size(); ++k) EXPECT_NEAR(z0[k], z1[k], 1e-14);
}

TEST(HitMass, WeightedSumClampedToUnitInterval) {
  const std::vector<double> z{0.3, 0.7};
  EXPECT_NEAR(hit_mass(std::vector<double>{0.5, 1.0}, z), 0.85, 1e-15);
  EXPECT_EQ(hit_mass(std::vector<double>{1.0, 1.0}, z), 1.0);
  EXPECT_EQ(hit_mass(std::vector<double>{0.0, 0.0}, z), 0.0);
  EXPECT_LE(hit_mass(std::vector<double>{1.0 + 1e-16, 1.0}, z), 1.0);
}

TEST(CachingPolicy, RowMajorLayoutAndColumns) {
  CachingPolicy p(3, 2);
  p(1, 0) = 0.5;
  p(2, 1) = 0.25;
  EXPECT_EQ(p.data()[2], 0.5);
  EXPECT_EQ(p.column(1), (std::vector<double>{0.0, 0.0, 0.25}));
  p.set_column(0, std::vector<double>{1.0, 1.0, 0.0});
  EXPECT_EQ(p.column_sum(0), 2.0);
  EXPECT_EQ(p.row(0)[0], 1.0);
}

TEST(Validate, AcceptsReferenceNetwork) {
  const auto c = oracle::reference_network();
  EXPECT_TRUE(validate(c).empty());
  EXPECT_TRUE(validate(c, feasible_policy(c), DtxPolicy{0.5}).empty());
  EXPECT_NO_THROW(require_valid(c, feasible_policy(c), DtxPolicy{1.0}));
}

TEST(Validate, ReportsEveryViolatedConstraint) {
  auto c = oracle::reference_network(10, 0.8, 3, 4.0, 3.0, 5, 5);
  c.tiers[0].density = -1.0;
  c.tiers[1].cache_size = 11;
  c.theta = 0.0;
  c.max_tx = 0;
  const auto v = validate(c);
  EXPECT_TRUE(has(v, "density > 0"));
  EXPECT_TRUE(has(v, "1 <= cache_size <= N"));
  EXPECT_TRUE(has(v, "theta > 0"));
  EXPECT_TRUE(has(v, "max_tx >= 1"));
  EXPECT_THROW(require_valid(c), ConfigError);
}

TEST(Validate, PolicyBoxSumAndDtx) {
  const auto c = oracle::reference_network(10, 0.8, 3, 4.0, 3.0, 5, 5);
  auto p = feasible_policy(c);
  p(0, 0) = 1.5;
  p(9, 1) = -0.1;
  const auto v = validate(c, p, DtxPolicy{0.0});
  EXPECT_TRUE(has(v, "0 <= T[n][k] <= 1"));
  EXPECT_TRUE(has(v, "sum_n T[n][k] = C_k"));
  EXPECT_TRUE(has(v, "beta in (0, 1]"));
  EXPECT_TRUE(has(validate(c, CachingPolicy(3, 2), DtxPolicy{}), "policy shape N x K"));
}

TEST(Validate, PopularityOrderingAndNormalization) {
  auto c = oracle::reference_network(3);
  c.catalog = Catalog::from_popularity({0.2, 0.5, 0.3});
  EXPECT_TRUE(has(validate(c), "popularity non-increasing"));
  c.catalog = Catalog::from_popularity({0.5, 0.3, 0.1});
  EXPECT_TRUE(has(validate(c), "sum of popularity = 1"));
}

TEST(RenormalizeColumns, RemovesSmallDriftOnly) {
  const auto c = oracle::reference_network(10, 0.8, 3, 4.0, 3.0, 3, 2);
  CachingPolicy p(10, 2);
  for (int n = 0; n < 10; ++n) {
    p(n, 0) = 0.3 + 1e-13;
    p(n, 1) = 0.2;
  }
  p(0, 1) = -1e-15;
  p(1, 1) = 0.2 + 1e-15;
  const auto q = renormalize_columns(p, c);
  EXPECT_NEAR(q.column_sum(0), 3.0, 1e-14);
  EXPECT_NEAR(q.column_sum(1), 2.0, 1e-14);
  for (const double v : q.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Decibels, RoundTrip) {
  EXPECT_NEAR(db_to_linear(3.0), std::pow(10.0, 0.3), 1e-15);
  EXPECT_NEAR(db_to_linear(-10.0), 0.1, 1e-16);
  for (double x : {1e-6, 0.5, 2.0, 1e3}) EXPECT_NEAR(db_to_linear(linear_to_db(x)), x, 1e-12 * x);
}
