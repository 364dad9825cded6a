#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hetcache/errors.hpp"
#include "hetcache/optimizer.hpp"

namespace hetcache {

const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::MostPopular: return "mpc";
    case Baseline::Uniform: return "uniform";
    case Baseline::Iid: return "iid";
  }
  return "?";
}

Baseline baseline_from_string(const std::string& name) {
  if (name == "mpc") return Baseline::MostPopular;
  if (name == "uniform") return Baseline::Uniform;
  if (name == "iid") return Baseline::Iid;
  throw ConfigError("unknown baseline '" + name + "' (expected mpc, uniform or iid)");
}

std::vector<double> iid_inclusion_probabilities(std::span<const double> popularity,
                                                int draws) {
  const int n_files = static_cast<int>(popularity.size());
  std::vector<double> out(popularity.size(), 0.0);
  if (draws <= 0) return out;
  if (draws >= n_files) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }

  // Successive sampling is the order of independent exponential clocks with
  // rates a_m. With v = exp(-a_n E_n), file n is in iff fewer than `draws`
  // other clocks ring first:
  //   P_n = int_0^1 Pr[ PoissonBinomial(1 - v^(a_m/a_n)) <= draws - 1 ] dv.
  boost::math::quadrature::tanh_sinh<double> integrator;
  std::vector<double> dp(static_cast<std::size_t>(draws));
  for (int n = 0; n < n_files; ++n) {
    const double an = popularity[static_cast<std::size_t>(n)];
    auto integrand = [&](double v) {
      if (v <= 0.0) return 0.0;
      const double log_v = std::log(v);
      std::fill(dp.begin(), dp.end(), 0.0);
      dp[0] = 1.0;
      for (int m = 0; m < n_files; ++m) {
        if (m == n) continue;
        const double stay = std::exp(popularity[static_cast<std::size_t>(m)] / an * log_v);
        const double ring = -std::expm1(popularity[static_cast<std::size_t>(m)] / an * log_v);
        for (int j = draws - 1; j >= 1; --j) {
          dp[static_cast<std::size_t>(j)] =
              dp[static_cast<std::size_t>(j)] * stay + dp[static_cast<std::size_t>(j) - 1] * ring;
        }
        dp[0] *= stay;
      }
      double total = 0.0;
      for (double p : dp) total += p;
      return total;
    };
    out[static_cast<std::size_t>(n)] =
        std::clamp(integrator.integrate(integrand, 0.0, 1.0, 1e-13), 0.0, 1.0);
  }
  return out;
}

CachingPolicy baseline_policy(Baseline kind, const NetworkConfig& config) {
  require_valid(config);
  const int n_files = config.n_files();
  CachingPolicy p(n_files, config.n_tiers());
  for (int k = 0; k < config.n_tiers(); ++k) {
    const int c = config.tiers[static_cast<std::size_t>(k)].cache_size;
    switch (kind) {
      case Baseline::MostPopular:
        for (int n = 0; n < c; ++n) p(n, k) = 1.0;
        break;
      case Baseline::Uniform:
        for (int n = 0; n < n_files; ++n) p(n, k) = static_cast<double>(c) / n_files;
        break;
      case Baseline::Iid:
        p.set_column(k, iid_inclusion_probabilities(config.catalog.popularity(), c));
        break;
    }
  }
  return p;
}

}  // namespace hetcache
