#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hetcache/errors.hpp"
#include "hetcache/specfun.hpp"
#include "oracles.hpp"

using namespace hetcache;

TEST(AlphaParams, RejectsNonPositiveExcess) {
  EXPECT_THROW(AlphaParams(2.0), DomainError);
  EXPECT_THROW(AlphaParams(1.5), DomainError);
  EXPECT_THROW(AlphaParams(std::nan("")), DomainError);
  EXPECT_DOUBLE_EQ(AlphaParams(4.0).delta(), 0.5);
}

TEST(GammaFn, MatchesStdTgamma) {
  for (double x : {0.1, 0.5, 0.75, 1.0, 1.5, 2.5, 3.3, 7.0, 12.25, 30.5, -0.5, -1.5, -2.25}) {
    const double want = std::tgamma(x);
    EXPECT_NEAR(gamma_fn(x), want, 2e-13 * std::abs(want)) << "x=" << x;
  }
}

TEST(GammaFn, ThrowsAtPoles) {
  EXPECT_THROW(gamma_fn(0.0), DomainError);
  EXPECT_THROW(gamma_fn(-3.0), DomainError);
}

TEST(GammaRatio, ZeroIndexAndTgammaOracle) {
  const AlphaParams a(3.5);
  EXPECT_EQ(gamma_ratio(0, a), 0.0);
  for (int i = 1; i <= 12; ++i) {
    const double want = std::tgamma(i + a.delta()) / std::tgamma(i);
    EXPECT_NEAR(gamma_ratio(i, a), want, 1e-13 * want);
  }
}

TEST(GammaProduct, ReflectionIdentity) {
  for (double alpha : {2.2, 3.0, 4.0, 6.0}) {
    const AlphaParams a(alpha);
    const double d = a.delta();
    EXPECT_NEAR(gamma_product(a), std::numbers::pi * d / std::sin(std::numbers::pi * d), 1e-13);
  }
}

struct HypCase {
  int i;
  double theta;
  double alpha;
  double value;  // 40-digit reference
};

TEST(Hyp2f1Neg, HighPrecisionReferenceValues) {
  const HypCase cases[] = {
      {1, 0.1, 4, 1.0968534082340389301},  {1, 2, 4, 2.351021717712079926},
      {3, 2, 3.5, 5.5359903356085914697},  {5, 0.7, 3, 6.0567030494455684497},
      {2, 20, 4, 10.537688357684762408},   {4, 150, 2.5, 751.54858994484563349},
      {1, 1e-3, 4, 1.0009996668665239206}, {3, 1e3, 5, 35.181375902591464645},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(hyp2f1_neg(c.i, c.theta, AlphaParams(c.alpha)), c.value, 1e-12 * c.value)
        << "i=" << c.i << " theta=" << c.theta << " alpha=" << c.alpha;
  }
}

TEST(Hyp2f1Neg, AgreesWithIntegralFormAcrossRegimes) {
  // Covers the series, Pfaff and large-argument branches and their seams.
  for (double alpha : {2.5, 3.0, 4.0, 5.5}) {
    for (int i : {0, 1, 2, 4, 7}) {
      for (double theta : {0.0, 1e-6, 0.3, 0.5, 0.5001, 2.0, 8.99, 9.0, 9.01, 40.0, 1e4}) {
        const double want = oracle::hyp(i, theta, alpha);
        EXPECT_NEAR(hyp2f1_neg(i, theta, AlphaParams(alpha)), want, 1e-11 * want)
            << "i=" << i << " theta=" << theta << " alpha=" << alpha;
      }
    }
  }
}

TEST(Hyp2f1NegExcess, KeepsRelativeAccuracyForTinyThreshold) {
  for (double alpha : {3.0, 4.0}) {
    for (int i : {1, 3, 5}) {
      for (double theta : {1e-12, 1e-8, 1e-5, 1e-2, 1.0}) {
        const double want = oracle::hyp_excess(i, theta, alpha);
        EXPECT_NEAR(hyp2f1_neg_excess(i, theta, AlphaParams(alpha)), want, 1e-10 * want)
            << "i=" << i << " theta=" << theta;
      }
    }
  }
}

TEST(Hyp2f1NegExcess, LinearLeadingTerm) {
  // 2F1(-d, i; 1-d; -x) = 1 + 2 i x / (alpha - 2) + O(x^2)
  const AlphaParams a(4.0);
  for (int i : {1, 2, 3}) {
    const double x = 1e-9;
    EXPECT_NEAR(hyp2f1_neg_excess(i, x, a) / x, 2.0 * i / (4.0 - 2.0), 1e-7);
  }
}

TEST(Hyp2f1Neg, MonotoneInIndexAndThreshold) {
  const AlphaParams a(3.5);
  for (double theta : {0.01, 1.0, 30.0}) {
    for (int i = 0; i < 8; ++i) {
      EXPECT_LT(hyp2f1_neg(i, theta, a), hyp2f1_neg(i + 1, theta, a));
    }
  }
  for (int i = 1; i < 4; ++i) {
    EXPECT_LT(hyp2f1_neg(i, 0.4, a), hyp2f1_neg(i, 0.6, a));
  }
}

TEST(Hyp2f1Neg, RejectsNegativeArguments) {
  EXPECT_THROW(hyp2f1_neg(-1, 1.0, AlphaParams(4.0)), DomainError);
  EXPECT_THROW(hyp2f1_neg(1, -1.0, AlphaParams(4.0)), DomainError);
}

TEST(Recip1f1Deriv, ExactRationalValuesAtAlphaFour) {
  // 1F1(-1/2; 1/2; x) = 1 - x - x^2/6 - x^3/30 - ..., so the reciprocal is
  // 1 + x + 7/6 x^2 + 41/30 x^3 + ...
  const AlphaParams a(4.0);
  EXPECT_THROW(recip_1f1_deriv(0, a), DomainError);
  EXPECT_NEAR(recip_1f1_deriv(1, a), 1.0, 1e-14);
  EXPECT_NEAR(recip_1f1_deriv(2, a), 7.0 / 3.0, 1e-13);
  EXPECT_NEAR(recip_1f1_deriv(3, a), 8.2, 1e-12);
  EXPECT_NEAR(recip_1f1_deriv(4, a), 38.409523809523809524, 1e-11);
}

TEST(Recip1f1Deriv, HighPrecisionDifferentiationReference) {
  EXPECT_NEAR(recip_1f1_deriv(1, AlphaParams(3.0)), 2.0, 1e-13);
  EXPECT_NEAR(recip_1f1_deriv(2, AlphaParams(3.0)), 8.5, 1e-12);
  EXPECT_NEAR(recip_1f1_deriv(3, AlphaParams(3.0)), 54.285714285714285714, 1e-10);
  EXPECT_NEAR(recip_1f1_deriv(5, AlphaParams(3.5)), 781.76621453838405135, 1e-8);
}
