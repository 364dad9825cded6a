#include "hetcache/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hetcache/errors.hpp"

namespace hetcache {

Catalog Catalog::zipf(int n_files, double gamma) {
  if (n_files < 1) throw ConfigError("catalog: n_files must be >= 1");
  Catalog c;
  c.popularity_.resize(static_cast<std::size_t>(n_files));
  double total = 0.0;
  for (int n = 0; n < n_files; ++n) {
    const double w = std::pow(static_cast<double>(n + 1), -gamma);
    c.popularity_[static_cast<std::size_t>(n)] = w;
    total += w;
  }
  for (double& a : c.popularity_) a /= total;
  c.zipf_gamma_ = gamma;
  return c;
}

Catalog Catalog::from_popularity(std::vector<double> popularity) {
  Catalog c;
  c.popularity_ = std::move(popularity);
  return c;
}

const char* to_string(Scenario s) {
  return s == Scenario::HighMobility ? "high_mobility" : "static";
}

CachingPolicy::CachingPolicy(int n_files, int n_tiers, double fill)
    : n_files_(n_files),
      n_tiers_(n_tiers),
      data_(static_cast<std::size_t>(n_files) * static_cast<std::size_t>(n_tiers),
            fill) {
  if (n_files < 0 || n_tiers < 0) {
    throw DomainError("CachingPolicy: negative dimensions");
  }
}

std::vector<double> CachingPolicy::column(int k) const {
  std::vector<double> col(static_cast<std::size_t>(n_files_));
  for (int n = 0; n < n_files_; ++n) col[static_cast<std::size_t>(n)] = (*this)(n, k);
  return col;
}

void CachingPolicy::set_column(int k, std::span<const double> values) {
  if (static_cast<int>(values.size()) != n_files_) {
    throw DomainError("CachingPolicy::set_column: length mismatch");
  }
  for (int n = 0; n < n_files_; ++n) (*this)(n, k) = values[static_cast<std::size_t>(n)];
}

double CachingPolicy::column_sum(int k) const {
  double sum = 0.0;
  for (int n = 0; n < n_files_; ++n) sum += (*this)(n, k);
  return sum;
}

std::vector<double> tier_weights(const NetworkConfig& config) {
  const double delta = config.alpha.delta();
  std::vector<double> z(config.tiers.size());
  // Normalize powers by the largest one first; z is invariant to the scale.
  double p_max = 0.0;
  for (const auto& t : config.tiers) p_max = std::max(p_max, t.power);
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    z[k] = config.tiers[k].density * std::pow(config.tiers[k].power / p_max, delta);
    total += z[k];
  }
  for (double& v : z) v /= total;
  return z;
}

double hit_mass(std::span<const double> t_n, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t k = 0; k < t_n.size(); ++k) s += z[k] * t_n[k];
  return std::clamp(s, 0.0, 1.0);
}

std::vector<double> hit_masses(const CachingPolicy& policy,
                               std::span<const double> z) {
  std::vector<double> s(static_cast<std::size_t>(policy.n_files()));
  for (int n = 0; n < policy.n_files(); ++n) {
    s[static_cast<std::size_t>(n)] = hit_mass(policy.row(n), z);
  }
  return s;
}

namespace {

std::string tier_loc(std::size_t k) { return "tier " + std::to_string(k); }

}  // namespace

std::vector<Violation> validate(const NetworkConfig& config) {
  std::vector<Violation> out;
  const int n_files = config.n_files();
  if (config.tiers.empty()) out.push_back({"K >= 1", "tiers", 0.0});
  for (std::size_t k = 0; k < config.tiers.size(); ++k) {
    const auto& t = config.tiers[k];
    if (!(t.density > 0.0)) out.push_back({"density > 0", tier_loc(k), t.density});
    if (!(t.power > 0.0)) out.push_back({"power > 0", tier_loc(k), t.power});
    if (t.cache_size < 1 || t.cache_size > n_files) {
      out.push_back({"1 <= cache_size <= N", tier_loc(k),
                     static_cast<double>(t.cache_size)});
    }
  }
  if (!(config.theta > 0.0) || !std::isfinite(config.theta)) {
    out.push_back({"theta > 0", "theta", config.theta});
  }
  if (config.max_tx < 1) {
    out.push_back({"max_tx >= 1", "max_tx", static_cast<double>(config.max_tx)});
  }
  if (n_files < 1) out.push_back({"N >= 1", "catalog", 0.0});

  const auto a = config.catalog.popularity();
  double total = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (!(a[n] > 0.0 && a[n] <= 1.0)) {
      out.push_back({"popularity a_n in (0, 1]", "a[" + std::to_string(n) + "]", a[n]});
    }
    if (n > 0 && a[n] > a[n - 1]) {
      out.push_back({"popularity non-increasing", "a[" + std::to_string(n) + "]",
                     a[n] - a[n - 1]});
    }
    total += a[n];
  }
  if (!a.empty() && std::abs(total - 1.0) > 1e-12) {
    out.push_back({"sum of popularity = 1", "catalog", total - 1.0});
  }
  return out;
}

std::vector<Violation> validate(const NetworkConfig& config,
                                const CachingPolicy& policy,
                                const DtxPolicy& dtx) {
  auto out = validate(config);
  if (policy.n_files() != config.n_files() || policy.n_tiers() != config.n_tiers()) {
    out.push_back({"policy shape N x K", "policy",
                   static_cast<double>(policy.n_files() * policy.n_tiers())});
  } else {
    for (int n = 0; n < policy.n_files(); ++n) {
      for (int k = 0; k < policy.n_tiers(); ++k) {
        const double v = policy(n, k);
        if (!(v >= 0.0 && v <= 1.0)) {
          out.push_back({"0 <= T[n][k] <= 1",
                         "T[" + std::to_string(n) + "][" + std::to_string(k) + "]",
                         v < 0.0 ? -v : v - 1.0});
        }
      }
    }
    for (int k = 0; k < policy.n_tiers(); ++k) {
      const double excess =
          policy.column_sum(k) - config.tiers[static_cast<std::size_t>(k)].cache_size;
      if (!(std::abs(excess) <= kColumnSumTolerance)) {
        out.push_back({"sum_n T[n][k] = C_k", tier_loc(static_cast<std::size_t>(k)),
                       excess});
      }
    }
  }
  if (!(dtx.beta > 0.0 && dtx.beta <= 1.0)) {
    out.push_back({"beta in (0, 1]", "dtx", dtx.beta});
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) os << "; ";
    os << v.constraint << " violated at " << v.location << " (" << v.magnitude << ")";
  }
  return os.str();
}

void require_valid(const NetworkConfig& config) {
  const auto v = validate(config);
  if (!v.empty()) throw ConfigError("invalid configuration: " + describe(v));
}

void require_valid(const NetworkConfig& config, const CachingPolicy& policy,
                   const DtxPolicy& dtx) {
  const auto v = validate(config, policy, dtx);
  if (!v.empty()) throw ConfigError("invalid configuration: " + describe(v));
}

CachingPolicy renormalize_columns(const CachingPolicy& policy,
                                  const NetworkConfig& config) {
  CachingPolicy out = policy;
  for (int k = 0; k < out.n_tiers(); ++k) {
    for (int n = 0; n < out.n_files(); ++n) out(n, k) = std::clamp(out(n, k), 0.0, 1.0);
    const double target = config.tiers[static_cast<std::size_t>(k)].cache_size;
    // A few passes suffice: each pass either closes the gap or saturates an
    // entry, shrinking the free set.
    for (int pass = 0; pass < out.n_files() + 1; ++pass) {
      const double gap = target - out.column_sum(k);
      if (std::abs(gap) <= 1e-15 * target) break;
      int free_count = 0;
      for (int n = 0; n < out.n_files(); ++n) {
        const double v = out(n, k);
        if (gap > 0 ? v < 1.0 : v > 0.0) ++free_count;
      }
      if (free_count == 0) break;
      const double share = gap / free_count;
      for (int n = 0; n < out.n_files(); ++n) {
        double& v = out(n, k);
        if (gap > 0 ? v < 1.0 : v > 0.0) v = std::clamp(v + share, 0.0, 1.0);
      }
    }
  }
  return out;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace hetcache
