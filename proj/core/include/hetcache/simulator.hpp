#pragma once

// Monte Carlo estimate of the STP: PPP base stations in a square window
// centered on the typical user, random caches, Rayleigh fading and random
// DTX, with content-based max-RSS association.

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "hetcache/model.hpp"

namespace hetcache {

using Rng = std::mt19937_64;

struct SimParams {
  double window_side = 4000.0;       ///< m
  std::int64_t n_realizations = 100000;
  std::uint64_t seed = 1;
  Scenario scenario = Scenario::HighMobility;
  int workers = 1;
  std::vector<int> files;            ///< 0-based file ids; empty means all
};

struct SimEstimate {
  double mean = 0.0;       ///< sum_n a_n q_n over the simulated files
  double std_error = 0.0;  ///< from the sample variance of the per-realization mean
  std::int64_t n = 0;
  std::vector<int> files;
  std::vector<double> per_file;
  std::vector<double> per_file_stderr;  ///< sqrt(q (1 - q) / n)
  std::int64_t uncovered = 0;           ///< (realization, file) pairs with no caching BS
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Homogeneous PPP of intensity lambda (per m^2) on [-L/2, L/2]^2.
std::vector<Point> sample_ppp(double lambda, double side, Rng& rng);

/// Systematic sampling of exactly cache_size distinct files whose inclusion
/// probabilities are t_col. Returned ids are increasing.
std::vector<int> assign_cache(std::span<const double> t_col, int cache_size, Rng& rng);

/// One network snapshot seen from the origin, valid for n_slots slots.
struct Realization {
  int n_files = 0;
  int n_slots = 0;
  std::vector<Point> position;
  std::vector<int> tier;
  std::vector<double> power;          ///< W
  std::vector<std::uint8_t> cached;   ///< [bs * n_files + file]
  std::vector<std::uint8_t> active;   ///< [slot * n_bs + bs]
  std::vector<double> fading;         ///< [slot * n_bs + bs], Exp(1)

  std::size_t n_bs() const { return position.size(); }
  bool caches(std::size_t bs, int file) const {
    return cached[bs * static_cast<std::size_t>(n_files) + static_cast<std::size_t>(file)] != 0;
  }
};

Realization draw_realization(const NetworkConfig& config, const CachingPolicy& policy,
                             const DtxPolicy& dtx, double side, int n_slots, Rng& rng);

/// Serving BS for `file`: the caching BS with the largest P_k r^-alpha.
std::optional<std::size_t> associate(const Realization& r, int file,
                                     const AlphaParams& alpha);

inline constexpr double kInactiveSir = -1.0;

/// SIR of the serving BS in `slot`; kInactiveSir when the serving BS is off,
/// +infinity when nobody else transmits.
double sir(const Realization& r, int slot, std::size_t serving, const AlphaParams& alpha);

/// Per-file stratified estimate. When outcomes is set, every
/// (realization, file, success) triple is written as CSV in index order.
SimEstimate simulate_stp(const NetworkConfig& config, const CachingPolicy& policy,
                         const DtxPolicy& dtx, const SimParams& params,
                         std::ostream* outcomes = nullptr);

}  // namespace hetcache
