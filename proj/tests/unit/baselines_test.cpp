#include <functional>
#include <numeric>

#include <gtest/gtest.h>

#include "hetcache/errors.hpp"
#include "hetcache/optimizer.hpp"
#include "oracles.hpp"

using namespace hetcache;

namespace {

// Sums the probability of every ordered draw sequence without replacement.
std::vector<double> inclusion_by_enumeration(const std::vector<double>& a, int draws) {
  std::vector<double> out(a.size(), 0.0);
  std::vector<int> picked;
  std::function<void(double, double)> rec = [&](double prob, double used) {
    if (static_cast<int>(picked.size()) == draws) {
      for (int f : picked) out[static_cast<std::size_t>(f)] += prob;
      return;
    }
    for (std::size_t n = 0; n < a.size(); ++n) {
      if (std::find(picked.begin(), picked.end(), static_cast<int>(n)) != picked.end()) continue;
      picked.push_back(static_cast<int>(n));
      rec(prob * a[n] / (1.0 - used), used + a[n]);
      picked.pop_back();
    }
  };
  rec(1.0, 0.0);
  return out;
}

}  // namespace

TEST(IidInclusion, MatchesOrderedDrawEnumeration) {
  for (double gamma : {0.3, 0.8, 1.4}) {
    const auto cat = Catalog::zipf(7, gamma);
    const std::vector<double> a(cat.popularity().begin(), cat.popularity().end());
    for (int draws : {1, 2, 3, 5}) {
      const auto got = iid_inclusion_probabilities(a, draws);
      const auto want = inclusion_by_enumeration(a, draws);
      for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(got[n], want[n], 1e-10);
      EXPECT_NEAR(std::accumulate(got.begin(), got.end(), 0.0), draws, 1e-10);
    }
  }
}

TEST(IidInclusion, EdgeDraws) {
  const std::vector<double> a{0.5, 0.3, 0.2};
  EXPECT_EQ(iid_inclusion_probabilities(a, 0), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(iid_inclusion_probabilities(a, 3), (std::vector<double>{1, 1, 1}));
  const auto one = iid_inclusion_probabilities(a, 1);
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(one[n], a[n], 1e-12);
}

TEST(BaselinePolicy, ShapesAndFeasibility) {
  const auto c = oracle::reference_network(12, 0.8, 3, 4.0, 3.0, 4, 2);
  const auto mpc = baseline_policy(Baseline::MostPopular, c);
  for (int n = 0; n < 12; ++n) {
    EXPECT_EQ(mpc(n, 0), n < 4 ? 1.0 : 0.0);
    EXPECT_EQ(mpc(n, 1), n < 2 ? 1.0 : 0.0);
  }
  const auto uni = baseline_policy(Baseline::Uniform, c);
  EXPECT_NEAR(uni(7, 0), 4.0 / 12.0, 1e-15);
  EXPECT_NEAR(uni(7, 1), 2.0 / 12.0, 1e-15);
  for (const auto kind : {Baseline::MostPopular, Baseline::Uniform, Baseline::Iid}) {
    EXPECT_TRUE(validate(c, baseline_policy(kind, c), DtxPolicy{}).empty()) << to_string(kind);
    EXPECT_EQ(baseline_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(baseline_from_string("lru"), ConfigError);
}
