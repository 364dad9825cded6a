#include "hetcache/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "hetcache/errors.hpp"

namespace hetcache {

namespace {

constexpr double kMaxMeanCount = 1e8;
constexpr std::int64_t kChunk = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 53 random bits in [0, 1).
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform point on [-L/2, L/2]^2 from the two 32-bit halves of one draw.
Point draw_point(double side, Rng& rng) {
  const std::uint64_t bits = rng();
  constexpr double scale = 0x1.0p-32;
  return {(static_cast<double>(bits >> 32) * scale - 0.5) * side,
          (static_cast<double>(bits & 0xffffffffULL) * scale - 0.5) * side};
}

/// Prefix sums of a cache column with the last one pinned to C exactly.
std::vector<double> cache_prefix(std::span<const double> t_col, int cache_size) {
  double total = 0.0;
  for (double t : t_col) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("assign_cache: entry outside [0, 1]");
    total += t;
  }
  if (std::abs(total - cache_size) > kColumnSumTolerance) {
    throw DomainError("assign_cache: column sums to " + std::to_string(total) +
                      ", expected " + std::to_string(cache_size));
  }
  std::vector<double> c(t_col.size() + 1, 0.0);
  for (std::size_t n = 0; n < t_col.size(); ++n) c[n + 1] = c[n] + t_col[n];
  c.back() = cache_size;
  return c;
}

/// File n is picked iff one of u, u+1, ... lands in [c_n, c_{n+1}).
template <class Mark>
void systematic_pick(const std::vector<double>& prefix, double u, Mark mark) {
  for (std::size_t n = 0; n + 1 < prefix.size(); ++n) {
    const double j0 = std::ceil(prefix[n] - u);
    if (u + j0 < prefix[n + 1]) mark(n);
  }
}

void check_window(const NetworkConfig& config, double side) {
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw DomainError("window side must be positive, got " + std::to_string(side));
  }
  for (const auto& t : config.tiers) {
    if (t.density * side * side >= kMaxMeanCount) {
      throw DomainError("mean BS count lambda*L^2 = " +
                        std::to_string(t.density * side * side) + " exceeds 1e8");
    }
  }
}

std::vector<double> path_gains(const Realization& r, double alpha) {
  std::vector<double> g(r.n_bs());
  for (std::size_t b = 0; b < g.size(); ++b) {
    const double d2 = r.position[b].x * r.position[b].x + r.position[b].y * r.position[b].y;
    g[b] = r.power[b] * std::exp(-0.5 * alpha * std::log(d2));
  }
  return g;
}

std::optional<std::size_t> strongest_caching(const Realization& r, int file,
                                             const std::vector<double>& gain) {
  std::optional<std::size_t> best;
  for (std::size_t b = 0; b < r.n_bs(); ++b) {
    if (r.caches(b, file) && (!best || gain[b] > gain[*best])) best = b;
  }
  return best;
}

/// Received power of every BS in one slot; returns the total.
double slot_powers(const Realization& r, int slot, const std::vector<double>& gain,
                   std::vector<double>& rx) {
  const std::size_t nb = r.n_bs();
  const std::size_t base = static_cast<std::size_t>(slot) * nb;
  rx.resize(nb);
  double total = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    rx[b] = r.active[base + b] ? gain[b] * r.fading[base + b] : 0.0;
    total += rx[b];
  }
  return total;
}

double sir_from_powers(double total, double signal) {
  if (signal <= 0.0) return kInactiveSir;
  const double interference = total - signal;
  if (interference <= 0.0) return std::numeric_limits<double>::infinity();
  return signal / interference;
}

}  // namespace

std::vector<Point> sample_ppp(double lambda, double side, Rng& rng) {
  if (!(lambda >= 0.0) || !(side > 0.0)) {
    throw DomainError("sample_ppp: need lambda >= 0 and side > 0");
  }
  const double mean = lambda * side * side;
  if (mean >= kMaxMeanCount) {
    throw DomainError("sample_ppp: mean count " + std::to_string(mean) + " exceeds 1e8");
  }
  std::vector<Point> pts;
  if (mean == 0.0) return pts;
  std::poisson_distribution<std::int64_t> count(mean);
  const auto n = count(rng);
  pts.resize(static_cast<std::size_t>(n));
  for (auto& p : pts) p = draw_point(side, rng);
  return pts;
}

std::vector<int> assign_cache(std::span<const double> t_col, int cache_size, Rng& rng) {
  const auto prefix = cache_prefix(t_col, cache_size);
  std::vector<int> files;
  files.reserve(static_cast<std::size_t>(cache_size));
  systematic_pick(prefix, uniform01(rng),
                  [&](std::size_t n) { files.push_back(static_cast<int>(n)); });
  return files;
}

Realization draw_realization(const NetworkConfig& config, const CachingPolicy& policy,
                             const DtxPolicy& dtx, double side, int n_slots, Rng& rng) {
  check_window(config, side);
  Realization r;
  r.n_files = policy.n_files();
  r.n_slots = n_slots;
  const auto nf = static_cast<std::size_t>(r.n_files);

  std::vector<std::int64_t> counts(config.tiers.size());
  std::size_t total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double mean = config.tiers[k].density * side * side;
    counts[k] = mean > 0.0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
    total += static_cast<std::size_t>(counts[k]);
  }
  r.position.resize(total);
  r.tier.resize(total);
  r.power.resize(total);
  r.cached.assign(total * nf, 0);

  std::size_t b = 0;
  for (int k = 0; k < config.n_tiers(); ++k) {
    const auto& tier = config.tiers[static_cast<std::size_t>(k)];
    const auto prefix = cache_prefix(policy.column(k), tier.cache_size);
    for (std::int64_t i = 0; i < counts[static_cast<std::size_t>(k)]; ++i, ++b) {
      r.position[b] = draw_point(side, rng);
      r.tier[b] = k;
      r.power[b] = tier.power;
      std::uint8_t* flags = &r.cached[b * nf];
      systematic_pick(prefix, uniform01(rng), [&](std::size_t n) { flags[n] = 1; });
    }
  }

  // One uniform per (slot, BS): u < beta means active, and then u / beta is
  // again uniform and drives the Exp(1) fading.
  r.active.assign(total * static_cast<std::size_t>(n_slots), 0);
  r.fading.assign(total * static_cast<std::size_t>(n_slots), 0.0);
  for (std::size_t i = 0; i < r.active.size(); ++i) {
    const double u = uniform01(rng);
    if (u < dtx.beta) {
      r.active[i] = 1;
      r.fading[i] = -std::log(1.0 - u / dtx.beta);
    }
  }
  return r;
}

std::optional<std::size_t> associate(const Realization& r, int file,
                                     const AlphaParams& alpha) {
  return strongest_caching(r, file, path_gains(r, alpha.alpha()));
}

double sir(const Realization& r, int slot, std::size_t serving, const AlphaParams& alpha) {
  const auto gain = path_gains(r, alpha.alpha());
  std::vector<double> rx;
  const double total = slot_powers(r, slot, gain, rx);
  return sir_from_powers(total, rx[serving]);
}

SimEstimate simulate_stp(const NetworkConfig& config, const CachingPolicy& policy,
                         const DtxPolicy& dtx, const SimParams& params,
                         std::ostream* outcomes) {
  require_valid(config, policy, dtx);
  check_window(config, params.window_side);
  if (params.n_realizations < 1) throw ConfigError("n_realizations must be >= 1");

  std::vector<int> files = params.files;
  if (files.empty()) {
    for (int n = 0; n < config.n_files(); ++n) files.push_back(n);
  }
  for (int f : files) {
    if (f < 0 || f >= config.n_files()) {
      throw ConfigError("simulated file id " + std::to_string(f) + " out of range");
    }
  }
  const auto nf = files.size();
  const auto n_real = static_cast<std::size_t>(params.n_realizations);
  const int M = config.max_tx;
  const double alpha = config.alpha.alpha();
  const double theta = config.theta;
  const bool is_static = params.scenario == Scenario::Static;

  std::vector<std::uint8_t> success(n_real * nf, 0);
  std::vector<std::uint8_t> uncovered(n_real * nf, 0);

  auto run_one = [&](std::size_t idx, std::vector<double>& rx) {
    Rng rng(splitmix64(params.seed + splitmix64(static_cast<std::uint64_t>(idx))));
    std::uint8_t* ok = &success[idx * nf];
    std::uint8_t* miss = &uncovered[idx * nf];

    auto evaluate = [&](const Realization& r, int slot, const std::vector<double>& gain,
                        const std::vector<std::optional<std::size_t>>& serving) {
      const double total = slot_powers(r, slot, gain, rx);
      for (std::size_t f = 0; f < nf; ++f) {
        if (!serving[f]) {
          miss[f] = 1;
          continue;
        }
        if (ok[f]) continue;
        const double s = sir_from_powers(total, rx[*serving[f]]);
        if (s != kInactiveSir && s >= theta) ok[f] = 1;
      }
    };
    auto serving_of = [&](const Realization& r, const std::vector<double>& gain) {
      std::vector<std::optional<std::size_t>> serving(nf);
      for (std::size_t f = 0; f < nf; ++f) serving[f] = strongest_caching(r, files[f], gain);
      return serving;
    };

    if (is_static) {
      const Realization r = draw_realization(config, policy, dtx, params.window_side, M, rng);
      const auto gain = path_gains(r, alpha);
      const auto serving = serving_of(r, gain);
      for (int slot = 0; slot < M; ++slot) evaluate(r, slot, gain, serving);
    } else {
      for (int slot = 0; slot < M; ++slot) {
        const Realization r = draw_realization(config, policy, dtx, params.window_side, 1, rng);
        const auto gain = path_gains(r, alpha);
        evaluate(r, 0, gain, serving_of(r, gain));
      }
    }
  };

  const int workers = std::max(1, params.workers);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::vector<double> rx;
    while (true) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n_real) break;
      const std::size_t end = std::min(n_real, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) run_one(i, rx);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SimEstimate est;
  est.n = params.n_realizations;
  est.files = files;
  est.per_file.assign(nf, 0.0);
  est.per_file_stderr.assign(nf, 0.0);
  std::vector<std::int64_t> hits(nf, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_real; ++i) {
    double y = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      const bool ok = success[i * nf + f] != 0;
      hits[f] += ok;
      est.uncovered += uncovered[i * nf + f];
      if (ok) y += config.catalog.popularity(files[f]);
      if (outcomes) {
        *outcomes << i << ',' << files[f] << ',' << (ok ? 1 : 0) << '\n';
      }
    }
    sum += y;
    sum_sq += y * y;
  }
  const double n = static_cast<double>(n_real);
  for (std::size_t f = 0; f < nf; ++f) {
    const double q = static_cast<double>(hits[f]) / n;
    est.per_file[f] = q;
    est.per_file_stderr[f] = std::sqrt(q * (1.0 - q) / n);
  }
  est.mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1)) : 0.0;
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace hetcache
