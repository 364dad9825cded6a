#include <algorithm>
#include <cmath>

#include "hetcache/errors.hpp"
#include "hetcache/optimizer.hpp"

namespace hetcache {

std::vector<double> project_capped_simplex(std::span<const double> v, double capacity) {
  const auto n = v.size();
  if (!(capacity >= 0.0 && capacity <= static_cast<double>(n))) {
    throw DomainError("project_capped_simplex: capacity outside [0, N]");
  }
  std::vector<double> x(n);
  if (n == 0) return x;
  auto fill = [&](double tau) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(v[i] - tau, 0.0, 1.0);
      sum += x[i];
    }
    return sum;
  };

  // sum(tau) is nonincreasing; tau in [min v - 1, max v] brackets every C.
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double lo = *lo_it - 1.0;
  double hi = *hi_it;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fill(mid) > capacity) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau = 0.5 * (lo + hi);
  fill(tau);

  // Entries a rounding error away from a bound are put on it, then the
  // interior entries share the remaining gap so the sum is exact.
  double sum = 0.0;
  for (auto& xi : x) {
    if (xi < 1e-12) xi = 0.0;
    if (xi > 1.0 - 1e-12) xi = 1.0;
    sum += xi;
  }
  double gap = capacity - sum;
  for (int pass = 0; pass < 4 && gap != 0.0; ++pass) {
    auto movable = [&](double xi) {
      return xi > 0.0 && xi < 1.0;
    };
    std::size_t free = 0;
    for (std::size_t i = 0; i < n; ++i) free += movable(x[i]) ? 1 : 0;
    const bool interior = free > 0;
    if (!interior) {
      for (std::size_t i = 0; i < n; ++i) free += (gap > 0 ? x[i] < 1.0 : x[i] > 0.0) ? 1 : 0;
    }
    if (free == 0) break;
    const double share = gap / static_cast<double>(free);
    sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool take = interior ? movable(x[i]) : (gap > 0 ? x[i] < 1.0 : x[i] > 0.0);
      if (take) x[i] = std::clamp(x[i] + share, 0.0, 1.0);
      sum += x[i];
    }
    gap = capacity - sum;
  }
  return x;
}

CachingPolicy project_policy(const CachingPolicy& policy, const NetworkConfig& config) {
  CachingPolicy out = policy;
  for (int k = 0; k < policy.n_tiers(); ++k) {
    const auto col = policy.column(k);
    out.set_column(k, project_capped_simplex(
                          col, config.tiers[static_cast<std::size_t>(k)].cache_size));
  }
  return out;
}

namespace {

/// Root of an increasing function on [lo, hi] by bisection.
template <class F>
double bisect_increasing(F f, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CachingPolicy canonical_policy(const CachingPolicy& policy, const NetworkConfig& config) {
  const int n_files = policy.n_files();
  const int n_tiers = policy.n_tiers();
  const auto z = tier_weights(config);
  const auto s = hit_masses(policy, z);

  // Block coordinate ascent on the dual: rows fix w_n, columns fix tau_k.
  std::vector<double> w(s);
  std::vector<double> tau(static_cast<std::size_t>(n_tiers), 0.0);
  auto entry = [&](int n, int k) {
    return std::clamp(w[static_cast<std::size_t>(n)] + tau[static_cast<std::size_t>(k)], 0.0, 1.0);
  };
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const auto [tmin, tmax] = std::minmax_element(tau.begin(), tau.end());
    for (int n = 0; n < n_files; ++n) {
      const auto row_mass = [&](double wn) {
        double acc = 0.0;
        for (int k = 0; k < n_tiers; ++k) {
          acc += z[static_cast<std::size_t>(k)] *
                 std::clamp(wn + tau[static_cast<std::size_t>(k)], 0.0, 1.0);
        }
        return acc;
      };
      w[static_cast<std::size_t>(n)] =
          bisect_increasing(row_mass, s[static_cast<std::size_t>(n)], -1.0 - *tmax, 1.0 - *tmin);
    }
    double worst = 0.0;
    for (int k = 0; k < n_tiers; ++k) {
      const double cap = config.tiers[static_cast<std::size_t>(k)].cache_size;
      const auto col_mass = [&](double t) {
        double acc = 0.0;
        for (int n = 0; n < n_files; ++n) {
          acc += std::clamp(w[static_cast<std::size_t>(n)] + t, 0.0, 1.0);
        }
        return acc;
      };
      const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
      const double before = tau[static_cast<std::size_t>(k)];
      tau[static_cast<std::size_t>(k)] = bisect_increasing(col_mass, cap, -1.0 - *wmax, 1.0 - *wmin);
      worst = std::max(worst, std::abs(tau[static_cast<std::size_t>(k)] - before));
    }
    if (worst < 1e-15) break;
  }

  CachingPolicy out(n_files, n_tiers);
  for (int n = 0; n < n_files; ++n) {
    for (int k = 0; k < n_tiers; ++k) out(n, k) = entry(n, k);
  }
  return project_policy(out, config);
}

}  // namespace hetcache
