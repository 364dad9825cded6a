#pragma once

// Precision-generic kernels shared by specfun (double) and the extended
// precision outage evaluation in analytics. Real must support the usual
// arithmetic plus pow, sin and abs found through ADL (double and
// boost::multiprecision floating types both qualify).

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include <boost/math/constants/constants.hpp>

#include "hetcache/errors.hpp"

namespace hetcache::detail {

inline constexpr int kMaxSeriesTerms = 10000;

/// Relative size of the last term at which a series is truncated.
template <class Real>
Real series_tolerance() {
  if constexpr (std::is_same_v<Real, double>) {
    return 1e-15;
  } else {
    return std::numeric_limits<Real>::epsilon() * 4;
  }
}

/// Gamma(1+delta) Gamma(1-delta).
template <class Real>
Real gamma_product_t(const Real& delta) {
  using std::sin;
  const Real pi = boost::math::constants::pi<Real>();
  return pi * delta / sin(pi * delta);
}

/// Gamma(i+delta)/Gamma(i) * Gamma(1-delta), zero at i = 0.
template <class Real>
Real interferer_moment_t(int i, const Real& delta) {
  if (i <= 0) return Real(0);
  Real r = gamma_product_t(delta);
  for (int j = 1; j < i; ++j) r *= (Real(j) + delta) / Real(j);
  return r;
}

[[noreturn]] inline void throw_series_failure(const char* where, int i,
                                              double theta) {
  throw NumericError(std::string(where) + ": series did not converge (i=" +
                     std::to_string(i) + ", theta=" + std::to_string(theta) +
                     ")");
}

/// 2F1(-delta, i; 1-delta; -theta) - 1.
template <class Real>
Real hyp2f1_neg_excess_t(int i, const Real& theta, const Real& delta) {
  using std::abs;
  using std::pow;
  if (i == 0 || theta == Real(0)) return Real(0);
  const Real tol = series_tolerance<Real>();

  if (theta <= Real(0.5)) {
    // t_k = (-delta)_k (i)_k / ((1-delta)_k k!) (-theta)^k, k >= 1.
    Real term = delta * Real(i) * theta / (Real(1) - delta);
    Real sum = term;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
      term *= -(Real(k) - delta) * Real(i + k) /
              ((Real(k + 1) - delta) * Real(k + 1)) * theta;
      sum += term;
      if (abs(term) <= tol * abs(sum)) return sum;
    }
    throw_series_failure("hyp2f1_neg", i, static_cast<double>(theta));
  }

  if (theta <= Real(9)) {
    // Pfaff: (1+theta)^-i 2F1(1, i; 1-delta; theta/(1+theta)); all terms > 0.
    const Real w = theta / (Real(1) + theta);
    Real term = 1;
    Real sum = 1;
    for (int k = 0; k < kMaxSeriesTerms; ++k) {
      term *= Real(i + k) / (Real(k + 1) - delta) * w;
      sum += term;
      if (term <= tol * sum) return sum * pow(Real(1) + theta, Real(-i)) - Real(1);
    }
    throw_series_failure("hyp2f1_neg", i, static_cast<double>(theta));
  }

  // Large theta: two-term connection formula in 1/theta. The first term
  // collapses because its series has a zero upper parameter.
  const Real x = Real(1) / theta;
  Real term = 1;
  Real sum = 1;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    term *= -Real(i + k) * (Real(i + k) + delta) /
            ((Real(i + k + 1) + delta) * Real(k + 1)) * x;
    sum += term;
    if (abs(term) <= tol * abs(sum)) {
      const Real leading = interferer_moment_t(i, delta) * pow(theta, delta);
      const Real tail = delta / (Real(i) + delta) * pow(x, Real(i)) * sum;
      return leading + tail - Real(1);
    }
  }
  throw_series_failure("hyp2f1_neg", i, static_cast<double>(theta));
}

}  // namespace hetcache::detail
