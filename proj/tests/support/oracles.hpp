#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: the hypergeometric values come from an integral form,
// Gamma from std::tgamma, and the STP from the textbook sums.

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hetcache/model.hpp"

namespace oracle {

// 2F1(-d, i; 1-d; -x) - 1 = d * int_0^1 t^(-d-1) (1 - (1 + x t)^-i) dt
inline double hyp_excess(int i, double theta, double alpha) {
  if (i == 0 || theta == 0.0) return 0.0;
  const double d = 2.0 / alpha;
  boost::math::quadrature::tanh_sinh<double> q;
  auto f = [&](double t) {
    if (t <= 0.0) return 0.0;
    // (1 - (1 + x t)^-i) / t stays finite as t -> 0
    return std::pow(t, -d) * (-std::expm1(-i * std::log1p(theta * t)) / t);
  };
  return d * q.integrate(f, 0.0, 1.0, 1e-14);
}

inline double hyp(int i, double theta, double alpha) { return 1.0 + hyp_excess(i, theta, alpha); }

inline double binom(int n, int k) {
  return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)));
}

// Gamma(i + d) / Gamma(i) * Gamma(1 - d) * theta^d, zero for i = 0.
inline double moment(int i, double theta, double alpha) {
  if (i == 0) return 0.0;
  const double d = 2.0 / alpha;
  return std::tgamma(i + d) / std::tgamma(i) * std::tgamma(1.0 - d) * std::pow(theta, d);
}

inline double W(double beta, double theta, double alpha) {
  return 1.0 - beta + beta * hyp(1, theta, alpha);
}

inline double V(double beta, double theta, double alpha) {
  const double d = 2.0 / alpha;
  return beta * std::tgamma(1.0 + d) * std::tgamma(1.0 - d) * std::pow(theta, d);
}

inline double F(int m, double beta, double theta, double alpha) {
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    acc += binom(m, i) * std::pow(beta, i) * std::pow(1.0 - beta, m - i) * hyp(i, theta, alpha);
  }
  return acc;
}

inline double G(int m, double beta, double theta, double alpha) {
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    acc += binom(m, i) * std::pow(beta, i) * std::pow(1.0 - beta, m - i) * moment(i, theta, alpha);
  }
  return acc;
}

inline double one_slot(double s, double beta, double theta, double alpha) {
  return beta * s / (W(beta, theta, alpha) * s + V(beta, theta, alpha) * (1.0 - s));
}

inline double q_hm(double s, double beta, double theta, double alpha, int M) {
  return 1.0 - std::pow(1.0 - one_slot(s, beta, theta, alpha), M);
}

inline double q_st(double s, double beta, double theta, double alpha, int M) {
  long double acc = 0.0L;
  for (int m = 1; m <= M; ++m) {
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    acc += sign * binom(M, m) * std::pow(beta, m) * s /
           (F(m, beta, theta, alpha) * s + G(m, beta, theta, alpha) * (1.0 - s));
  }
  return static_cast<double>(acc);
}

inline std::vector<double> z(const hetcache::NetworkConfig& c) {
  std::vector<double> w;
  double sum = 0.0;
  for (const auto& t : c.tiers) {
    w.push_back(t.density * std::pow(t.power, 2.0 / c.alpha.alpha()));
    sum += w.back();
  }
  for (auto& x : w) x /= sum;
  return w;
}

inline double density_of_radius(double r) { return 1.0 / (r * r * std::numbers::pi); }

/// Two-tier network used throughout the evaluation section.
inline hetcache::NetworkConfig reference_network(int n_files = 50, double gamma = 0.8,
                                                 int max_tx = 3, double alpha = 4.0,
                                                 double theta_db = 3.0, int c1 = 25,
                                                 int c2 = 15) {
  hetcache::NetworkConfig c;
  c.tiers = {{density_of_radius(250.0), 20.0, c1}, {density_of_radius(50.0), 0.13, c2}};
  c.alpha = hetcache::AlphaParams(alpha);
  c.theta = std::pow(10.0, theta_db / 10.0);
  c.max_tx = max_tx;
  c.catalog = hetcache::Catalog::zipf(n_files, gamma);
  return c;
}

}  // namespace oracle
