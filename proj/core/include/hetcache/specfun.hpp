#pragma once

// Special functions behind the closed-form STP expressions: the Gamma
// function, the family 2F1(-2/a, i; 1-2/a; -theta) for integer i, and the
// Taylor coefficients of 1 / 1F1(-2/a; 1-2/a; x).

namespace hetcache {

/// Path-loss exponent together with the exponent delta = 2/alpha.
class AlphaParams {
 public:
  /// Throws DomainError unless alpha > 2 (and finite).
  explicit AlphaParams(double alpha);

  double alpha() const { return alpha_; }
  double delta() const { return delta_; }

  friend bool operator==(const AlphaParams&, const AlphaParams&) = default;

 private:
  double alpha_;
  double delta_;
};

/// Gamma(x). Lanczos approximation (g = 7, 9 terms) on x >= 1/2, reflection
/// below. Throws DomainError at the poles x = 0, -1, -2, ...
double gamma_fn(double x);

/// Gamma(i + delta) / Gamma(i), with the i = 0 value pinned to 0 (1/Gamma(0)).
double gamma_ratio(int i, const AlphaParams& alpha);

/// Gamma(1 + delta) * Gamma(1 - delta) = pi*delta / sin(pi*delta).
double gamma_product(const AlphaParams& alpha);

/// 2F1(-delta, i; 1 - delta; -theta) for i >= 0, theta >= 0.
///
/// Three evaluation regimes, all with positive or rapidly alternating terms:
///   theta <= 1/2      direct power series in -theta;
///   1/2 < theta <= 9  Pfaff transform to (1+theta)^-i 2F1(1, i; 1-delta; w),
///                     w = theta/(1+theta) in [1/3, 0.9];
///   theta > 9         connection formula in 1/theta (delta is never an
///                     integer, so the two-term form applies).
/// Throws NumericError if a series has not settled after 10000 terms.
double hyp2f1_neg(int i, double theta, const AlphaParams& alpha);

/// hyp2f1_neg(i, theta, alpha) - 1, computed without cancellation for small
/// theta. This is what the low-threshold outage expressions need.
double hyp2f1_neg_excess(int i, double theta, const AlphaParams& alpha);

/// d^M/dx^M [1F1(-delta; 1-delta; x)]^-1 at x = 0, i.e. M! times the M-th
/// coefficient of the reciprocal power series.
double recip_1f1_deriv(int order, const AlphaParams& alpha);

}  // namespace hetcache
