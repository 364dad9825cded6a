#include "hetcache/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hetcache/detail/hypergeometric.hpp"
#include "hetcache/errors.hpp"

namespace hetcache {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993227684700473478,  676.520368121885098567009190444019,
    -1259.13921672240287047156078755283, 771.3234287776530788486528258894,
    -176.61502916214059906584551354,     12.507343278686904814458936853,
    -0.13857109526572011689554707,       9.984369578019570859563e-6,
    1.50563273514931155834e-7};

double lanczos_gamma(double x) {
  // Valid for x >= 1/2.
  const double xm1 = x - 1.0;
  double series = kLanczosCoeffs[0];
  for (std::size_t k = 1; k < kLanczosCoeffs.size(); ++k) {
    series += kLanczosCoeffs[k] / (xm1 + static_cast<double>(k));
  }
  const double t = xm1 + kLanczosG + 0.5;
  // Split the power so large arguments do not overflow before exp(-t).
  const double half_pow = std::pow(t, 0.5 * (xm1 + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_pow *
         (half_pow * std::exp(-t)) * series;
}

}  // namespace

AlphaParams::AlphaParams(double alpha) : alpha_(alpha), delta_(2.0 / alpha) {
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw DomainError("path-loss exponent must satisfy alpha > 2, got " +
                      std::to_string(alpha));
  }
}

double gamma_fn(double x) {
  if (x <= 0.0 && x == std::floor(x)) {
    throw DomainError("gamma_fn: pole at non-positive integer " +
                      std::to_string(x));
  }
  if (x < 0.5) {
    return std::numbers::pi /
           (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
  }
  return lanczos_gamma(x);
}

double gamma_ratio(int i, const AlphaParams& alpha) {
  if (i < 0) throw DomainError("gamma_ratio: i must be non-negative");
  if (i == 0) return 0.0;
  double r = gamma_fn(1.0 + alpha.delta());
  for (int j = 1; j < i; ++j) r *= (j + alpha.delta()) / j;
  return r;
}

double gamma_product(const AlphaParams& alpha) {
  return detail::gamma_product_t(alpha.delta());
}

double hyp2f1_neg_excess(int i, double theta, const AlphaParams& alpha) {
  if (i < 0) throw DomainError("hyp2f1_neg: i must be non-negative");
  if (!(theta >= 0.0)) throw DomainError("hyp2f1_neg: theta must be >= 0");
  return detail::hyp2f1_neg_excess_t<double>(i, theta, alpha.delta());
}

double hyp2f1_neg(int i, double theta, const AlphaParams& alpha) {
  return 1.0 + hyp2f1_neg_excess(i, theta, alpha);
}

double recip_1f1_deriv(int order, const AlphaParams& alpha) {
  if (order < 1) throw DomainError("recip_1f1_deriv: order must be >= 1");
  // 1F1(-d; 1-d; x) = 1 - sum_k d / ((k-d) k!) x^k. With c_n the n-th
  // derivative of the reciprocal at 0:
  //   c_n = d * sum_{k=1..n} C(n,k) c_{n-k} / (k - d),  c_0 = 1.
  const double d = alpha.delta();
  std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
  c[0] = 1.0;
  for (int n = 1; n <= order; ++n) {
    double binom = 1.0;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      binom = binom * (n - k + 1) / k;
      acc += binom * c[static_cast<std::size_t>(n - k)] / (k - d);
    }
    c[static_cast<std::size_t>(n)] = d * acc;
  }
  return c[static_cast<std::size_t>(order)];
}

}  // namespace hetcache
