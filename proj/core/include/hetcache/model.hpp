#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetcache/specfun.hpp"

namespace hetcache {

/// One tier of base stations. Units: BS/m^2, W, files.
struct TierConfig {
  double density = 0.0;
  double power = 0.0;
  int cache_size = 0;
};

/// File catalog with popularity sorted in non-increasing order.
class Catalog {
 public:
  Catalog() = default;

  /// a_n = n^-gamma / sum_j j^-gamma, n = 1..n_files.
  static Catalog zipf(int n_files, double gamma);
  /// Takes the vector as given; validate() reports ordering/normalization.
  static Catalog from_popularity(std::vector<double> popularity);

  int n_files() const { return static_cast<int>(popularity_.size()); }
  std::span<const double> popularity() const { return popularity_; }
  double popularity(int n) const { return popularity_[static_cast<std::size_t>(n)]; }
  std::optional<double> zipf_gamma() const { return zipf_gamma_; }

 private:
  std::vector<double> popularity_;
  std::optional<double> zipf_gamma_;
};

enum class Scenario { HighMobility, Static };

const char* to_string(Scenario s);

struct NetworkConfig {
  std::vector<TierConfig> tiers;
  AlphaParams alpha{4.0};
  double theta = 1.0;  ///< linear SIR threshold
  int max_tx = 1;      ///< M
  Catalog catalog;

  int n_tiers() const { return static_cast<int>(tiers.size()); }
  int n_files() const { return catalog.n_files(); }
};

/// N x K matrix of caching probabilities, stored row-major so that the row
/// of file n is contiguous.
class CachingPolicy {
 public:
  CachingPolicy() = default;
  CachingPolicy(int n_files, int n_tiers, double fill = 0.0);

  int n_files() const { return n_files_; }
  int n_tiers() const { return n_tiers_; }

  double& operator()(int n, int k) { return data_[index(n, k)]; }
  double operator()(int n, int k) const { return data_[index(n, k)]; }

  std::span<const double> row(int n) const {
    return {data_.data() + index(n, 0), static_cast<std::size_t>(n_tiers_)};
  }
  std::vector<double> column(int k) const;
  void set_column(int k, std::span<const double> values);
  double column_sum(int k) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const CachingPolicy&, const CachingPolicy&) = default;

 private:
  std::size_t index(int n, int k) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_tiers_) +
           static_cast<std::size_t>(k);
  }

  int n_files_ = 0;
  int n_tiers_ = 0;
  std::vector<double> data_;
};

struct DtxPolicy {
  double beta = 1.0;
};

inline constexpr double kColumnSumTolerance = 1e-9;

/// z_k = lambda_k P_k^delta / sum_j lambda_j P_j^delta.
std::vector<double> tier_weights(const NetworkConfig& config);

/// s_n = sum_k z_k T_{n,k}, clamped to [0, 1] against rounding.
double hit_mass(std::span<const double> t_n, std::span<const double> z);

/// s_n for every file.
std::vector<double> hit_masses(const CachingPolicy& policy,
                               std::span<const double> z);

struct Violation {
  std::string constraint;  ///< human readable name of the violated rule
  std::string location;    ///< e.g. "tier 1", "T[3][0]", "catalog"
  double magnitude = 0.0;  ///< size of the violation (0 if not numeric)
};

std::vector<Violation> validate(const NetworkConfig& config);
std::vector<Violation> validate(const NetworkConfig& config,
                                const CachingPolicy& policy,
                                const DtxPolicy& dtx);

/// Throws ConfigError with every violation listed when validate() is not ok.
void require_valid(const NetworkConfig& config);
void require_valid(const NetworkConfig& config, const CachingPolicy& policy,
                   const DtxPolicy& dtx);

std::string describe(const std::vector<Violation>& violations);

/// Redistributes small column-sum drift over entries strictly inside (0, 1)
/// after clamping to [0, 1]. Intended for iterates that are already within a
/// few ulps of feasible; large violations are left for validate() to report.
CachingPolicy renormalize_columns(const CachingPolicy& policy,
                                  const NetworkConfig& config);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace hetcache
