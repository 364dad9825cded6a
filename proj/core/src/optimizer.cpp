#include "hetcache/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetcache/analytics.hpp"
#include "hetcache/errors.hpp"

namespace hetcache {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr int kStallLimit = 5;

bool equal_cache_sizes(const NetworkConfig& config) {
  for (const auto& t : config.tiers) {
    if (t.cache_size != config.tiers.front().cache_size) return false;
  }
  return true;
}

CachingPolicy symmetric_policy(std::span<const double> t, int n_tiers) {
  CachingPolicy p(static_cast<int>(t.size()), n_tiers);
  for (int n = 0; n < p.n_files(); ++n) {
    for (int k = 0; k < n_tiers; ++k) p(n, k) = t[static_cast<std::size_t>(n)];
  }
  return p;
}

CachingPolicy uniform_policy(const NetworkConfig& config) {
  CachingPolicy p(config.n_files(), config.n_tiers());
  for (int k = 0; k < config.n_tiers(); ++k) {
    const double v = static_cast<double>(config.tiers[static_cast<std::size_t>(k)].cache_size) /
                     config.n_files();
    for (int n = 0; n < config.n_files(); ++n) p(n, k) = v;
  }
  return p;
}

double separable_value(const SeparableObjective& obj, std::span<const double> s) {
  double f = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) f += obj.value(static_cast<int>(n), s[n]);
  return f;
}

/// Projected step of every column along g (one value per file).
CachingPolicy project_step(const CachingPolicy& x, std::span<const double> g, double t,
                           const NetworkConfig& config) {
  CachingPolicy out = x;
  std::vector<double> col(static_cast<std::size_t>(x.n_files()));
  for (int k = 0; k < x.n_tiers(); ++k) {
    for (int n = 0; n < x.n_files(); ++n) {
      col[static_cast<std::size_t>(n)] = x(n, k) + t * g[static_cast<std::size_t>(n)];
    }
    out.set_column(k, project_capped_simplex(
                          col, config.tiers[static_cast<std::size_t>(k)].cache_size));
  }
  return out;
}

/// sum_{n,k} z_k u_n (y - x)_{n,k}
double weighted_dot(const CachingPolicy& x, const CachingPolicy& y,
                    std::span<const double> u, std::span<const double> z) {
  double acc = 0.0;
  for (int n = 0; n < x.n_files(); ++n) {
    for (int k = 0; k < x.n_tiers(); ++k) {
      acc += z[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(n)] *
             (y(n, k) - x(n, k));
    }
  }
  return acc;
}

double metric_residual(const CachingPolicy& x, std::span<const double> g,
                       std::span<const double> z, const NetworkConfig& config) {
  const CachingPolicy y = project_step(x, g, 1.0, config);
  double acc = 0.0;
  for (int n = 0; n < x.n_files(); ++n) {
    for (int k = 0; k < x.n_tiers(); ++k) {
      const double d = y(n, k) - x(n, k);
      acc += z[static_cast<std::size_t>(k)] * d * d;
    }
  }
  return std::sqrt(acc);
}

double static_objective(const StpEvaluator& eval, std::span<const double> s,
                        const NetworkConfig& config) {
  double q = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    q += config.catalog.popularity(static_cast<int>(n)) * eval.st(s[n]);
  }
  return q;
}

double static_dbeta(const StpEvaluator& eval, std::span<const double> s,
                    const NetworkConfig& config) {
  double g = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    g += config.catalog.popularity(static_cast<int>(n)) * eval.st_dbeta(s[n]);
  }
  return g;
}

/// Swaps in the canonical representative when it keeps the objective.
void canonicalize(SolveResult& r, Scenario scenario, const NetworkConfig& config) {
  CachingPolicy c = canonical_policy(r.policy, config);
  const double q = stp_objective(c, r.dtx.beta, scenario, config);
  if (q >= r.objective - 1e-10) {
    r.policy = std::move(c);
    r.objective = q;
  }
}

}  // namespace

const char* to_string(SolveStatus s) {
  return s == SolveStatus::Converged ? "converged" : "iteration_cap";
}

SolveResult maximize_separable(const NetworkConfig& config,
                               const SeparableObjective& objective,
                               const CachingPolicy& start, const SolveOptions& opts) {
  const auto z = tier_weights(config);
  const int n_files = config.n_files();

  auto gradient = [&](std::span<const double> s) {
    std::vector<double> g(s.size());
    for (std::size_t n = 0; n < s.size(); ++n) g[n] = objective.slope(static_cast<int>(n), s[n]);
    return g;
  };

  SolveResult r;
  CachingPolicy x = project_policy(start, config);
  auto s = hit_masses(x, z);
  double f = separable_value(objective, s);
  auto g = gradient(s);
  r.trace.push_back(f);

  double step = 1.0;
  int stall = 0;
  r.status = SolveStatus::IterationCap;
  for (int it = 0; it < opts.max_inner_iters; ++it) {
    r.kkt_residual = metric_residual(x, g, z, config);
    if (r.kkt_residual < opts.tol_kkt) {
      r.status = SolveStatus::Converged;
      break;
    }

    CachingPolicy trial;
    double f_trial = f;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      trial = project_step(x, g, step, config);
      const double ascent = weighted_dot(x, trial, g, z);
      f_trial = separable_value(objective, hit_masses(trial, z));
      if (f_trial >= f + kArmijo * ascent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Rounding floor reached before the residual target.
      r.status = SolveStatus::Converged;
      break;
    }

    const auto s_new = hit_masses(trial, z);
    const auto g_new = gradient(s_new);
    double xx = 0.0, xg = 0.0;
    for (int n = 0; n < n_files; ++n) {
      for (int k = 0; k < config.n_tiers(); ++k) {
        const double dx = trial(n, k) - x(n, k);
        const double zk = z[static_cast<std::size_t>(k)];
        xx += zk * dx * dx;
        xg += zk * dx * (g_new[static_cast<std::size_t>(n)] - g[static_cast<std::size_t>(n)]);
      }
    }
    step = xg < 0.0 ? std::clamp(xx / -xg, 1e-12, 1e12) : std::min(step * 4.0, 1e12);

    const double gain = f_trial - f;
    x = std::move(trial);
    s = s_new;
    g = g_new;
    f = f_trial;
    r.trace.push_back(f);
    r.iterations = it + 1;
    stall = gain <= opts.tol_obj ? stall + 1 : 0;
    if (stall >= kStallLimit) {
      r.kkt_residual = metric_residual(x, g, z, config);
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.policy = std::move(x);
  r.objective = f;
  return r;
}

std::vector<double> separable_bisection(int n_files, double capacity,
                                        const std::function<double(int, double)>& marginal,
                                        const SolveOptions& opts) {
  if (n_files < 1) return {};
  if (!(capacity >= 0.0 && capacity <= n_files)) {
    throw DomainError("separable_bisection: capacity outside [0, N]");
  }
  std::vector<double> at0(static_cast<std::size_t>(n_files));
  std::vector<double> at1(static_cast<std::size_t>(n_files));
  for (int n = 0; n < n_files; ++n) {
    at0[static_cast<std::size_t>(n)] = marginal(n, 0.0);
    at1[static_cast<std::size_t>(n)] = marginal(n, 1.0);
  }

  auto solve_file = [&](int n, double eta) {
    if (at0[static_cast<std::size_t>(n)] <= eta) return 0.0;
    if (at1[static_cast<std::size_t>(n)] >= eta) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < opts.bisection_iters && hi - lo >= opts.tol_var; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (marginal(n, mid) > eta) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> t(static_cast<std::size_t>(n_files));
  auto total = [&](double eta) {
    double sum = 0.0;
    for (int n = 0; n < n_files; ++n) {
      t[static_cast<std::size_t>(n)] = solve_file(n, eta);
      sum += t[static_cast<std::size_t>(n)];
    }
    return sum;
  };

  double lo = *std::min_element(at1.begin(), at1.end());
  double hi = *std::max_element(at0.begin(), at0.end());
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw NumericError("separable_bisection: multiplier interval does not bracket");
  }
  for (int it = 0; it < opts.bisection_iters &&
                   hi - lo >= opts.tol_var * std::max(1.0, std::abs(hi));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) > capacity) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  total(0.5 * (lo + hi));
  return project_capped_simplex(t, capacity);
}

SolveResult optimize_hm_gradient(const NetworkConfig& config, const SolveOptions& opts) {
  require_valid(config);
  const StpBasis basis(config);
  const StpEvaluator eval(basis, 1.0);
  const auto a = config.catalog.popularity();
  SeparableObjective obj{
      [&](int n, double s) { return a[static_cast<std::size_t>(n)] * eval.hm(s); },
      [&](int n, double s) { return a[static_cast<std::size_t>(n)] * eval.hm_ds(s); }};
  SolveResult r = maximize_separable(config, obj, uniform_policy(config), opts);
  r.dtx.beta = 1.0;
  canonicalize(r, Scenario::HighMobility, config);
  r.kkt_residual = kkt_residual(r.policy, r.dtx, Scenario::HighMobility, config, false);
  return r;
}

CachingPolicy kkt_bisection_hm(const NetworkConfig& config, const SolveOptions& opts) {
  require_valid(config);
  if (!equal_cache_sizes(config)) {
    throw DomainError("kkt_bisection_hm: all tiers must have the same cache size");
  }
  const StpBasis basis(config);
  const StpEvaluator eval(basis, 1.0);
  const auto a = config.catalog.popularity();
  const auto t = separable_bisection(
      config.n_files(), config.tiers.front().cache_size,
      [&](int n, double x) { return a[static_cast<std::size_t>(n)] * eval.hm_ds(x); }, opts);
  return symmetric_policy(t, config.n_tiers());
}

SolveResult optimize_hm(const NetworkConfig& config, const SolveOptions& opts) {
  require_valid(config);
  if (!equal_cache_sizes(config)) return optimize_hm_gradient(config, opts);
  SolveResult r;
  r.policy = kkt_bisection_hm(config, opts);
  r.dtx.beta = 1.0;
  r.objective = stp_objective(r.policy, 1.0, Scenario::HighMobility, config);
  r.trace.push_back(r.objective);
  r.iterations = 1;
  r.kkt_residual = kkt_residual(r.policy, r.dtx, Scenario::HighMobility, config, false);
  return r;
}

CachingPolicy grad_q2(const CachingPolicy& policy, double beta,
                      const NetworkConfig& config) {
  const StpBasis basis(config);
  const StpEvaluator eval(basis, beta);
  const auto z = basis.z();
  CachingPolicy g(policy.n_files(), policy.n_tiers());
  for (int n = 0; n < policy.n_files(); ++n) {
    const double d = config.catalog.popularity(n) *
                     eval.st_part_ds(hit_mass(policy.row(n), z), false);
    for (int k = 0; k < policy.n_tiers(); ++k) g(n, k) = d * z[static_cast<std::size_t>(k)];
  }
  return g;
}

SolveResult ccp_caching_st(double beta, const CachingPolicy& start,
                           const NetworkConfig& config, const SolveOptions& opts) {
  require_valid(config);
  const StpBasis basis(config);
  const StpEvaluator eval(basis, beta);
  const auto z = basis.z();
  const auto a = config.catalog.popularity();
  const bool symmetric = equal_cache_sizes(config);

  SolveResult r;
  r.dtx.beta = beta;
  CachingPolicy x = project_policy(start, config);
  auto s = hit_masses(x, z);
  double q = static_objective(eval, s, config);
  r.trace.push_back(q);
  r.status = SolveStatus::IterationCap;

  std::vector<double> even_slope(s.size());
  for (int j = 0; j < opts.max_outer_iters; ++j) {
    for (std::size_t n = 0; n < s.size(); ++n) even_slope[n] = eval.st_part_ds(s[n], false);

    CachingPolicy next;
    if (symmetric) {
      const auto t = separable_bisection(
          config.n_files(), config.tiers.front().cache_size,
          [&](int n, double x_n) {
            const auto i = static_cast<std::size_t>(n);
            return a[i] * (eval.st_part_ds(x_n, true) - even_slope[i]);
          },
          opts);
      next = symmetric_policy(t, config.n_tiers());
    } else {
      SeparableObjective surrogate{
          [&](int n, double s_n) {
            const auto i = static_cast<std::size_t>(n);
            return a[i] * (eval.st_part(s_n, true) - even_slope[i] * s_n);
          },
          [&](int n, double s_n) {
            const auto i = static_cast<std::size_t>(n);
            return a[i] * (eval.st_part_ds(s_n, true) - even_slope[i]);
          }};
      next = maximize_separable(config, surrogate, x, opts).policy;
    }

    const auto s_next = hit_masses(next, z);
    const double q_next = static_objective(eval, s_next, config);
    if (q_next < q) {
      // Surrogate solve fell short by rounding; keep the better iterate.
      r.status = SolveStatus::Converged;
      break;
    }
    const double gain = q_next - q;
    x = std::move(next);
    s = s_next;
    q = q_next;
    r.trace.push_back(q);
    r.iterations = j + 1;
    if (gain < opts.tol_obj) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.policy = std::move(x);
  r.objective = q;
  canonicalize(r, Scenario::Static, config);
  r.kkt_residual = kkt_residual(r.policy, r.dtx, Scenario::Static, config, false);
  return r;
}

DtxPolicy optimize_dtx_st(const CachingPolicy& policy, const NetworkConfig& config,
                          const SolveOptions& opts, double start_beta) {
  require_valid(config);
  if (config.max_tx == 1) return {1.0};
  const StpBasis basis(config);
  const auto s = hit_masses(policy, basis.z());
  auto q = [&](double b) { return static_objective(StpEvaluator(basis, b), s, config); };
  auto dq = [&](double b) { return static_dbeta(StpEvaluator(basis, b), s, config); };
  const double lo = opts.beta_floor;
  const double hi = 1.0;

  // Walks outwards from b0 until dq changes sign, then bisects.
  auto stationary_near = [&](double b0) {
    const double d0 = dq(b0);
    if (d0 == 0.0) return b0;
    const double dir = d0 > 0.0 ? 1.0 : -1.0;
    double inner = b0;
    double width = 1e-6;
    double outer = b0;
    while (true) {
      outer = std::clamp(b0 + dir * width, lo, hi);
      if (dq(outer) * dir <= 0.0) break;
      if (outer == lo || outer == hi) return outer;
      inner = outer;
      width *= 2.0;
    }
    for (int it = 0; it < opts.bisection_iters && std::abs(outer - inner) >= opts.tol_var;
         ++it) {
      const double mid = 0.5 * (inner + outer);
      if (dq(mid) * dir > 0.0) {
        inner = mid;
      } else {
        outer = mid;
      }
    }
    return 0.5 * (inner + outer);
  };

  double best = std::clamp(start_beta, lo, hi);
  double q_best = q(best);
  auto consider = [&](double b) {
    const double v = q(b);
    if (v > q_best) {
      q_best = v;
      best = b;
    }
  };

  if (config.max_tx == 2) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = q(c), fd = q(d);
    for (int it = 0; it < opts.bisection_iters && b - a >= opts.tol_var; ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = q(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = q(d);
      }
    }
    const double golden = 0.5 * (a + b);
    consider(golden);
    consider(hi);
    consider(stationary_near(golden));
    return {best};
  }

  double b = best;
  for (int i = 0; i < opts.dtx_gp_iters; ++i) {
    const double step = opts.gp_step_c / (2.0 + std::pow(static_cast<double>(i), 0.55));
    b = std::clamp(b + step * dq(b), lo, hi);
    consider(b);
  }
  consider(stationary_near(best));
  return {best};
}

SolveResult alternate_optimize_st(const NetworkConfig& config, const SolveOptions& opts,
                                  DtxPolicy start) {
  require_valid(config);
  if (!(start.beta > 0.0 && start.beta <= 1.0)) {
    throw DomainError("alternate_optimize_st: initial beta must lie in (0, 1]");
  }
  SolveResult r;
  CachingPolicy t = optimize_hm(config, opts).policy;
  double beta = start.beta;
  double q = stp_objective(t, beta, Scenario::Static, config);
  r.trace.push_back(q);
  r.status = SolveStatus::IterationCap;

  for (int j = 0; j < opts.max_outer_iters; ++j) {
    const SolveResult ccp = ccp_caching_st(beta, t, config, opts);
    const DtxPolicy dtx = optimize_dtx_st(ccp.policy, config, opts, beta);
    const double q_next = stp_objective(ccp.policy, dtx.beta, Scenario::Static, config);
    if (q_next < q) {
      r.status = SolveStatus::Converged;
      break;
    }
    const double gain = q_next - q;
    t = ccp.policy;
    beta = dtx.beta;
    q = q_next;
    r.trace.push_back(q);
    r.iterations = j + 1;
    if (gain < opts.tol_obj) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.policy = std::move(t);
  r.dtx.beta = beta;
  r.objective = q;
  canonicalize(r, Scenario::Static, config);
  r.kkt_residual =
      kkt_residual(r.policy, r.dtx, Scenario::Static, config, true, opts.beta_floor);
  return r;
}

double kkt_residual(const CachingPolicy& policy, const DtxPolicy& dtx, Scenario scenario,
                    const NetworkConfig& config, bool include_beta, double beta_floor) {
  const StpBasis basis(config);
  const StpEvaluator eval(basis, dtx.beta);
  const auto z = basis.z();
  const auto s = hit_masses(policy, z);
  const bool hm = scenario == Scenario::HighMobility;

  double acc = 0.0;
  std::vector<double> col(static_cast<std::size_t>(policy.n_files()));
  for (int k = 0; k < policy.n_tiers(); ++k) {
    const double zk = z[static_cast<std::size_t>(k)];
    for (int n = 0; n < policy.n_files(); ++n) {
      const double sn = s[static_cast<std::size_t>(n)];
      const double slope = hm ? eval.hm_ds(sn) : eval.st_ds(sn);
      col[static_cast<std::size_t>(n)] =
          policy(n, k) + zk * config.catalog.popularity(n) * slope;
    }
    const auto proj = project_capped_simplex(
        col, config.tiers[static_cast<std::size_t>(k)].cache_size);
    for (int n = 0; n < policy.n_files(); ++n) {
      const double d = proj[static_cast<std::size_t>(n)] - policy(n, k);
      acc += d * d;
    }
  }

  if (include_beta) {
    double g = 0.0;
    if (hm) {
      const double h = 1e-6;
      const double b_hi = std::min(1.0, dtx.beta + h);
      const double b_lo = std::max(beta_floor, dtx.beta - h);
      g = (stp_objective(policy, b_hi, scenario, config) -
           stp_objective(policy, b_lo, scenario, config)) /
          (b_hi - b_lo);
    } else {
      g = static_dbeta(eval, s, config);
    }
    const double d = std::clamp(dtx.beta + g, beta_floor, 1.0) - dtx.beta;
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace hetcache
