#pragma once

// Closed-form successful transmission probability (STP) of random caching
// with retransmissions and random DTX, for the high-mobility and static
// scenarios, plus the low-threshold outage asymptotics.

#include <span>
#include <vector>

#include "hetcache/model.hpp"

namespace hetcache {

inline constexpr int kMaxAnalyticTx = 64;

/// W(beta) and V(beta): the per-slot denominator weights of a cached and
/// an uncached share of the hit mass.
struct HmCoefficients {
  double w = 1.0;
  double v = 0.0;
};

/// F_m(beta), G_m(beta) for m = 1..M (index m-1).
struct StCoefficients {
  std::vector<double> f;
  std::vector<double> g;
};

HmCoefficients hm_coefficients(double beta, double theta, const AlphaParams& alpha);
StCoefficients st_coefficients(int max_tx, double beta, double theta,
                               const AlphaParams& alpha);

/// The beta-independent part of every STP expression for one configuration:
/// tier weights, 2F1 excesses e_i = 2F1(-d, i; 1-d; -theta) - 1 and the
/// scaled interferer moments Gamma(i+d)/Gamma(i) Gamma(1-d) theta^d, i = 0..M.
class StpBasis {
 public:
  explicit StpBasis(const NetworkConfig& config);

  int max_tx() const { return max_tx_; }
  double theta() const { return theta_; }
  const AlphaParams& alpha() const { return alpha_; }
  std::span<const double> z() const { return z_; }
  std::span<const double> excess() const { return excess_; }
  std::span<const double> moment() const { return moment_; }

 private:
  int max_tx_;
  double theta_;
  AlphaParams alpha_;
  std::vector<double> z_;
  std::vector<double> excess_;
  std::vector<double> moment_;
};

/// STP of a single file as a function of its hit mass s_n, for a fixed
/// activity probability. Cheap to construct from a shared StpBasis; used by
/// the optimizers for every objective and gradient evaluation.
class StpEvaluator {
 public:
  StpEvaluator(const StpBasis& basis, double beta);
  StpEvaluator(const NetworkConfig& config, double beta);

  double beta() const { return beta_; }
  int max_tx() const { return max_tx_; }
  const HmCoefficients& hm_coefficients() const { return hm_; }
  const StCoefficients& st_coefficients() const { return st_; }

  /// Pr(S_n) for one slot.
  double one_slot(double s) const;

  double hm(double s) const;
  double hm_outage(double s) const;
  /// d hm / d s.
  double hm_ds(double s) const;

  double st(double s) const;
  double st_ds(double s) const;
  /// d st / d beta at fixed s.
  double st_dbeta(double s) const;

  /// Odd-m (q1) or even-m (q2) part of the static alternating sum, without
  /// the sign: st(s) = st_part(s, true) - st_part(s, false).
  double st_part(double s, bool odd) const;
  double st_part_ds(double s, bool odd) const;

 private:
  double beta_;
  int max_tx_;
  HmCoefficients hm_;
  StCoefficients st_;
  std::vector<double> df_;     // dF_m/dbeta
  std::vector<double> dg_;     // dG_m/dbeta
  std::vector<double> weight_; // C(M,m) beta^m
  double w_minus_beta_ = 0.0;  // W - beta, kept separate for small theta
};

double stp_one_slot(std::span<const double> t_n, double beta,
                    const NetworkConfig& config);
double stp_file_hm(std::span<const double> t_n, double beta,
                   const NetworkConfig& config);
double stp_file_st(std::span<const double> t_n, double beta,
                   const NetworkConfig& config);

enum class Provenance { Analytic, Simulated };

struct StpReport {
  Scenario scenario = Scenario::HighMobility;
  Provenance provenance = Provenance::Analytic;
  double aggregate = 0.0;
  double aggregate_stderr = 0.0;
  std::vector<double> per_file;
  std::vector<double> per_file_stderr;
};

/// q = sum_n a_n q_n for the given scenario.
StpReport stp_aggregate(const CachingPolicy& policy, const DtxPolicy& dtx,
                        Scenario scenario, const NetworkConfig& config);

/// Same objective without building a report; for optimizer inner loops.
double stp_objective(const CachingPolicy& policy, double beta, Scenario scenario,
                     const NetworkConfig& config);

// ---------------------------------------------------------------------------
// Low-threshold regime.

enum class AsymptoticCase {
  CachedEverywhereNoDtx,    ///< case i:   T_n = 1, beta = 1
  PartialCacheNoDtx,        ///< case ii:  T_n != 1, beta = 1
  CachedEverywhereWithDtx,  ///< case iii: T_n = 1, beta < 1
  PartialCacheWithDtx,      ///< case iv:  T_n != 1, beta < 1
};

const char* to_string(AsymptoticCase c);

AsymptoticCase classify_case(std::span<const double> t_n, double beta);

/// Outage ~ constant_term + c_term as theta -> 0.
struct OutageAsymptote {
  double constant_term = 0.0;  ///< (1 - beta)^M
  double c_term = 0.0;
  AsymptoticCase id = AsymptoticCase::CachedEverywhereNoDtx;

  double value() const { return constant_term + c_term; }
};

OutageAsymptote outage_asymptotic(std::span<const double> t_n, double beta,
                                  Scenario scenario, const NetworkConfig& config);

/// 1 - q_n, evaluated without catastrophic cancellation. The static scenario
/// is summed in 50-digit arithmetic because its alternating binomial sum
/// cancels down to O(theta^M).
double outage_file(std::span<const double> t_n, double beta, Scenario scenario,
                   const NetworkConfig& config);

/// Limit of log(outage)/log(theta): {M, 2M/alpha or 2/alpha, 0} by case,
/// and 0 for a file cached nowhere.
double diversity_gain(std::span<const double> t_n, double beta, Scenario scenario,
                      const NetworkConfig& config);

/// Least-squares slope of log(outage) against log(theta) over theta_grid.
/// Needs at least 3 distinct grid points, all in (0, 1e-3].
double diversity_slope(std::span<const double> t_n, double beta, Scenario scenario,
                       const NetworkConfig& config,
                       std::span<const double> theta_grid);

}  // namespace hetcache
