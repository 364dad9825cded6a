#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetcache/model.hpp"

namespace hetcache {

struct SolveOptions {
  double tol_obj = 1e-13;      ///< stop when the objective gain falls below this
  double tol_var = 1e-12;      ///< bisection width / feasibility target
  double tol_kkt = 1e-9;       ///< projected-gradient residual for inner ascent
  int max_outer_iters = 500;   ///< CCP and alternating rounds
  int max_inner_iters = 20000; ///< projected-gradient steps per solve
  int bisection_iters = 200;
  double gp_step_c = 0.05;     ///< c in eps(i) = c / (2 + i^0.55)
  int dtx_gp_iters = 400;
  double beta_floor = 1e-4;    ///< lower end of the DTX search interval
};

enum class SolveStatus { Converged, IterationCap };

const char* to_string(SolveStatus s);

struct SolveResult {
  CachingPolicy policy;
  DtxPolicy dtx;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> trace;
  SolveStatus status = SolveStatus::Converged;
  double kkt_residual = 0.0;
};

/// Euclidean projection onto {x in [0,1]^N : sum x = capacity}.
std::vector<double> project_capped_simplex(std::span<const double> v, double capacity);

/// Column-wise projection of every tier onto its cache-size constraint.
CachingPolicy project_policy(const CachingPolicy& policy, const NetworkConfig& config);

/// STP depends on T only through the hit masses s_n, so optima are not
/// unique. Returns the policy with the same s_n that is closest to
/// tier-symmetric (min sum z_k (T_nk - s_n)^2). Its entries have the form
/// clamp(w_n + tau_k, 0, 1), so every column is monotone in s_n.
CachingPolicy canonical_policy(const CachingPolicy& policy, const NetworkConfig& config);

/// Objective of the form sum_n h(n, s_n), with h concave in s.
struct SeparableObjective {
  std::function<double(int, double)> value;
  std::function<double(int, double)> slope;  ///< dh/ds
};

/// Projected-gradient ascent with Armijo backtracking and Barzilai-Borwein
/// trial steps. The step is taken in the diag(z_k) metric, i.e. every column
/// moves along (dh/ds)(n, s_n), which keeps tier-symmetric starts symmetric.
SolveResult maximize_separable(const NetworkConfig& config,
                               const SeparableObjective& objective,
                               const CachingPolicy& start, const SolveOptions& opts);

/// Solves sum_n t_n = capacity where t_n solves marginal(n, t_n) = eta and
/// each marginal is decreasing on [0, 1] (clamped at the ends).
std::vector<double> separable_bisection(int n_files, double capacity,
                                        const std::function<double(int, double)>& marginal,
                                        const SolveOptions& opts);

/// High-mobility optimum: beta = 1 and the caching that maximizes q_hm.
SolveResult optimize_hm(const NetworkConfig& config, const SolveOptions& opts = {});

/// Projected-gradient route of optimize_hm, usable for any cache sizes.
SolveResult optimize_hm_gradient(const NetworkConfig& config,
                                 const SolveOptions& opts = {});

/// Equal cache sizes only: tier-symmetric water-filling on a_n dq_hm/ds.
CachingPolicy kkt_bisection_hm(const NetworkConfig& config, const SolveOptions& opts = {});

/// Gradient of the even-m part of q_st with respect to T.
CachingPolicy grad_q2(const CachingPolicy& policy, double beta, const NetworkConfig& config);

/// Convex-concave procedure for the static caching problem at fixed beta.
/// Uses the water-filling closed form when all cache sizes are equal.
SolveResult ccp_caching_st(double beta, const CachingPolicy& start,
                           const NetworkConfig& config, const SolveOptions& opts = {});

/// Best beta for fixed caching in the static scenario. start_beta seeds the
/// gradient route (M >= 3) and is never beaten by the returned value.
DtxPolicy optimize_dtx_st(const CachingPolicy& policy, const NetworkConfig& config,
                          const SolveOptions& opts = {}, double start_beta = 1.0);

/// Alternates CCP caching updates and DTX updates from (T_hm*, beta0).
SolveResult alternate_optimize_st(const NetworkConfig& config,
                                  const SolveOptions& opts = {},
                                  DtxPolicy start = {});

/// || P_X(x + grad q(x)) - x ||_2 over caching entries, plus the beta
/// coordinate on [beta_floor, 1] when include_beta is set.
double kkt_residual(const CachingPolicy& policy, const DtxPolicy& dtx,
                    Scenario scenario, const NetworkConfig& config,
                    bool include_beta, double beta_floor = 1e-4);

enum class Baseline { MostPopular, Uniform, Iid };

const char* to_string(Baseline b);
Baseline baseline_from_string(const std::string& name);

CachingPolicy baseline_policy(Baseline kind, const NetworkConfig& config);

/// Inclusion probability of each file when `draws` files are picked one at a
/// time without replacement, each pick proportional to popularity among the
/// files not yet picked.
std::vector<double> iid_inclusion_probabilities(std::span<const double> popularity,
                                                int draws);

}  // namespace hetcache
