#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hetcache/analytics.hpp"
#include "hetcache/errors.hpp"
#include "oracles.hpp"

using namespace hetcache;

namespace {

NetworkConfig network_at(double theta, int M = 3, double alpha = 4.0) {
  auto c = oracle::reference_network(4, 0.8, M, alpha, 0.0, 2, 2);
  c.theta = theta;
  return c;
}

struct CaseInput {
  std::vector<double> t;
  double beta;
  AsymptoticCase id;
};

const CaseInput kCases[] = {
    {{1.0, 1.0}, 1.0, AsymptoticCase::CachedEverywhereNoDtx},
    {{0.6, 0.3}, 1.0, AsymptoticCase::PartialCacheNoDtx},
    {{1.0, 1.0}, 0.6, AsymptoticCase::CachedEverywhereWithDtx},
    {{0.6, 0.3}, 0.6, AsymptoticCase::PartialCacheWithDtx},
};

// Leading outage terms as theta -> 0, written out case by case.
double c_hm(const CaseInput& in, double theta, int M, double alpha) {
  const auto c = network_at(theta, M, alpha);
  const double s = hit_mass(in.t, oracle::z(c));
  const double d = 2.0 / alpha;
  const double gp = std::tgamma(1 + d) * std::tgamma(1 - d);
  const double b = in.beta;
  switch (in.id) {
    case AsymptoticCase::CachedEverywhereNoDtx:
      return std::pow(theta, M) * std::pow(2.0 / (alpha - 2.0), M);
    case AsymptoticCase::PartialCacheNoDtx:
      return std::pow(theta, 2.0 * M / alpha) * std::pow((1.0 / s - 1.0) * gp, M);
    case AsymptoticCase::CachedEverywhereWithDtx:
      return theta * std::pow(1 - b, M - 1) * M * b * b * 2.0 / (alpha - 2.0);
    case AsymptoticCase::PartialCacheWithDtx:
      return std::pow(theta, d) * std::pow(1 - b, M - 1) * M * b * b * (1.0 / s - 1.0) * gp;
  }
  return 0.0;
}

double c_st_partial(const CaseInput& in, double theta, int M, double alpha) {
  const auto c = network_at(theta, M, alpha);
  const double s = hit_mass(in.t, oracle::z(c));
  const double d = 2.0 / alpha;
  const double b = in.beta;
  double outer = 0.0;
  for (int m = 1; m <= M; ++m) {
    double inner = 0.0;
    for (int i = 1; i <= m; ++i) {
      inner += oracle::binom(m, i) * std::pow(b, i) * std::pow(1 - b, m - i) *
               std::tgamma(i + d) / std::tgamma(i);
    }
    outer += oracle::binom(M, m) * (m % 2 ? 1.0 : -1.0) * std::pow(b, m) * inner;
  }
  return std::pow(theta, d) * (1.0 / s - 1.0) * std::tgamma(1 - d) * outer;
}

}  // namespace

TEST(ClassifyCase, FourCases) {
  for (const auto& in : kCases) EXPECT_EQ(classify_case(in.t, in.beta), in.id);
  EXPECT_STREQ(to_string(AsymptoticCase::PartialCacheWithDtx), "iv");
}

TEST(OutageAsymptote, HighMobilityLeadingTerms) {
  for (const auto& in : kCases) {
    for (double theta : {1e-4, 1e-2}) {
      const auto c = network_at(theta);
      const auto a = outage_asymptotic(in.t, in.beta, Scenario::HighMobility, c);
      EXPECT_NEAR(a.constant_term, std::pow(1 - in.beta, 3), 1e-15);
      const double want = c_hm(in, theta, 3, 4.0);
      EXPECT_NEAR(a.c_term, want, 1e-12 * want) << to_string(in.id);
      EXPECT_EQ(a.id, in.id);
    }
  }
}

TEST(OutageAsymptote, StaticLeadingTerms) {
  const double theta = 1e-3;
  const auto c = network_at(theta);
  const auto& i = kCases[0];
  EXPECT_NEAR(outage_asymptotic(i.t, 1.0, Scenario::Static, c).c_term,
              std::pow(theta, 3) * 8.2, 1e-20);
  const auto& iii = kCases[2];
  EXPECT_NEAR(outage_asymptotic(iii.t, iii.beta, Scenario::Static, c).c_term,
              c_hm(iii, theta, 3, 4.0), 1e-15);
  for (const auto* in : {&kCases[1], &kCases[3]}) {
    const double want = c_st_partial(*in, theta, 3, 4.0);
    EXPECT_NEAR(outage_asymptotic(in->t, in->beta, Scenario::Static, c).c_term, want,
                1e-12 * want);
  }
}

TEST(OutageFile, AgreesWithComplementAtModerateThreshold) {
  for (const auto& in : kCases) {
    const auto c = network_at(0.5, 4, 3.5);
    EXPECT_NEAR(outage_file(in.t, in.beta, Scenario::HighMobility, c),
                1.0 - stp_file_hm(in.t, in.beta, c), 1e-13);
    EXPECT_NEAR(outage_file(in.t, in.beta, Scenario::Static, c),
                1.0 - stp_file_st(in.t, in.beta, c), 1e-12);
  }
}

TEST(OutageFile, RatioToAsymptoteTendsToOneMonotonically) {
  const std::vector<double> grid{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  for (const auto sc : {Scenario::HighMobility, Scenario::Static}) {
    for (const auto& in : kCases) {
      double prev_gap = INFINITY;
      for (double theta : grid) {
        const auto c = network_at(theta);
        const double ratio = outage_file(in.t, in.beta, sc, c) /
                             outage_asymptotic(in.t, in.beta, sc, c).value();
        const double gap = std::abs(ratio - 1.0);
        EXPECT_LE(gap, prev_gap + 1e-12) << to_string(sc) << " " << to_string(in.id)
                                         << " theta=" << theta;
        prev_gap = gap;
      }
      EXPECT_LT(prev_gap, 1e-2) << to_string(sc) << " " << to_string(in.id);
    }
  }
}

TEST(OutageFile, UncachedFileAlwaysFails) {
  const auto c = network_at(1e-3);
  const std::vector<double> none{0.0, 0.0};
  EXPECT_EQ(outage_file(none, 0.7, Scenario::Static, c), 1.0);
  EXPECT_EQ(outage_asymptotic(none, 0.7, Scenario::HighMobility, c).value(), 1.0);
  EXPECT_EQ(diversity_gain(none, 1.0, Scenario::HighMobility, c), 0.0);
}

TEST(DiversityGain, ClosedFormValues) {
  const auto c = network_at(1e-3, 3, 4.0);
  EXPECT_EQ(diversity_gain(kCases[0].t, 1.0, Scenario::HighMobility, c), 3.0);
  EXPECT_EQ(diversity_gain(kCases[0].t, 1.0, Scenario::Static, c), 3.0);
  EXPECT_DOUBLE_EQ(diversity_gain(kCases[1].t, 1.0, Scenario::HighMobility, c), 1.5);
  EXPECT_DOUBLE_EQ(diversity_gain(kCases[1].t, 1.0, Scenario::Static, c), 0.5);
  EXPECT_EQ(diversity_gain(kCases[2].t, 0.6, Scenario::Static, c), 0.0);
  EXPECT_EQ(diversity_gain(kCases[3].t, 0.6, Scenario::HighMobility, c), 0.0);
}

TEST(DiversitySlope, FitMatchesClosedForm) {
  const std::vector<double> grid{1e-6, 3.1622776601683795e-6, 1e-5, 3.1622776601683795e-5, 1e-4};
  for (auto [M, alpha] : std::vector<std::pair<int, double>>{{1, 3.0}, {2, 4.0}, {3, 4.0}}) {
    const auto c = network_at(1e-4, M, alpha);
    for (const auto sc : {Scenario::HighMobility, Scenario::Static}) {
      for (const auto& in : {kCases[0], kCases[1]}) {
        EXPECT_NEAR(diversity_slope(in.t, in.beta, sc, c, grid), diversity_gain(in.t, in.beta, sc, c), 0.05);
      }
    }
  }
}

TEST(DiversitySlope, RejectsShortOrLargeGrids) {
  const auto c = network_at(1e-4);
  const std::vector<double> t{1.0, 1.0};
  EXPECT_THROW(diversity_slope(t, 1.0, Scenario::HighMobility, c, std::vector<double>{1e-6, 1e-5}),
               DomainError);
  EXPECT_THROW(diversity_slope(t, 1.0, Scenario::HighMobility, c,
                               std::vector<double>{1e-6, 1e-5, 1e-2}),
               DomainError);
}
