#include "hetcache/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hetcache/detail/hypergeometric.hpp"
#include "hetcache/errors.hpp"

namespace hetcache {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

constexpr double kCaseTolerance = 1e-12;

void check_max_tx(int max_tx) {
  if (max_tx < 1 || max_tx > kMaxAnalyticTx) {
    throw DomainError("max_tx must be in [1, " + std::to_string(kMaxAnalyticTx) +
                      "], got " + std::to_string(max_tx));
  }
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw DomainError("beta must lie in (0, 1], got " + std::to_string(beta));
  }
}

void check_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw DomainError("theta must be positive and finite, got " + std::to_string(theta));
  }
}

template <class Real>
std::vector<Real> binomial_row(int m) {
  std::vector<Real> c(static_cast<std::size_t>(m) + 1);
  c[0] = Real(1);
  for (int i = 1; i <= m; ++i) {
    c[static_cast<std::size_t>(i)] =
        c[static_cast<std::size_t>(i - 1)] * Real(m - i + 1) / Real(i);
  }
  return c;
}

/// sum_i C(m,i) beta^i (1-beta)^(m-i) x_i, i = 0..m.
template <class Real>
Real bernstein(int m, const Real& beta, const std::vector<Real>& x) {
  using std::pow;
  const auto c = binomial_row<Real>(m);
  Real acc = 0;
  for (int i = 0; i <= m; ++i) {
    acc += c[static_cast<std::size_t>(i)] * pow(beta, Real(i)) *
           pow(Real(1) - beta, Real(m - i)) * x[static_cast<std::size_t>(i)];
  }
  return acc;
}

/// d/dbeta of bernstein(m, beta, x).
double bernstein_dbeta(int m, double beta, const std::vector<double>& x) {
  if (m == 0) return 0.0;
  const auto c = binomial_row<double>(m - 1);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += c[static_cast<std::size_t>(i)] * std::pow(beta, i) *
           std::pow(1.0 - beta, m - 1 - i) *
           (x[static_cast<std::size_t>(i) + 1] - x[static_cast<std::size_t>(i)]);
  }
  return m * acc;
}

template <class Real>
void fill_basis(int max_tx, const Real& theta, const Real& delta,
                std::vector<Real>& excess, std::vector<Real>& moment) {
  using std::pow;
  excess.assign(static_cast<std::size_t>(max_tx) + 1, Real(0));
  moment.assign(static_cast<std::size_t>(max_tx) + 1, Real(0));
  const Real theta_d = pow(theta, delta);
  for (int i = 1; i <= max_tx; ++i) {
    excess[static_cast<std::size_t>(i)] = detail::hyp2f1_neg_excess_t<Real>(i, theta, delta);
    moment[static_cast<std::size_t>(i)] = detail::interferer_moment_t<Real>(i, delta) * theta_d;
  }
}

/// Static outage sum_{m=0..M} C(M,m) (-beta)^m s / (F_m s + G_m (1-s)),
/// written with F_m - 1 so nothing of size 1 is subtracted inside a term.
template <class Real>
Real static_outage_t(int max_tx, const Real& beta, const Real& s, const Real& theta,
                     const Real& delta) {
  using std::pow;
  std::vector<Real> excess, moment;
  fill_basis<Real>(max_tx, theta, delta, excess, moment);
  const auto binom = binomial_row<Real>(max_tx);
  Real out = 1;
  for (int m = 1; m <= max_tx; ++m) {
    const Real f_ex = bernstein<Real>(m, beta, excess);
    const Real g = bernstein<Real>(m, beta, moment);
    const Real term = binom[static_cast<std::size_t>(m)] * pow(beta, Real(m)) * s /
                      (s + s * f_ex + g * (Real(1) - s));
    out += (m % 2 == 1) ? -term : term;
  }
  return out;
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double file_hit_mass(std::span<const double> t_n, const NetworkConfig& config) {
  if (static_cast<int>(t_n.size()) != config.n_tiers()) {
    throw DomainError("caching row has " + std::to_string(t_n.size()) +
                      " entries, expected K = " + std::to_string(config.n_tiers()));
  }
  for (double t : t_n) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DomainError("caching probability outside [0, 1]: " + std::to_string(t));
    }
  }
  return hit_mass(t_n, tier_weights(config));
}

void check_file_inputs(double beta, const NetworkConfig& config) {
  check_beta(beta);
  check_theta(config.theta);
  check_max_tx(config.max_tx);
}

}  // namespace

HmCoefficients hm_coefficients(double beta, double theta, const AlphaParams& alpha) {
  check_beta(beta);
  check_theta(theta);
  const double d = alpha.delta();
  return {1.0 - beta + beta * hyp2f1_neg(1, theta, alpha),
          beta * gamma_fn(1.0 + d) * gamma_fn(1.0 - d) * std::pow(theta, d)};
}

StCoefficients st_coefficients(int max_tx, double beta, double theta,
                               const AlphaParams& alpha) {
  check_max_tx(max_tx);
  check_beta(beta);
  check_theta(theta);
  std::vector<double> excess, moment;
  fill_basis<double>(max_tx, theta, alpha.delta(), excess, moment);
  StCoefficients out;
  for (int m = 1; m <= max_tx; ++m) {
    out.f.push_back(1.0 + bernstein<double>(m, beta, excess));
    out.g.push_back(bernstein<double>(m, beta, moment));
  }
  return out;
}

StpBasis::StpBasis(const NetworkConfig& config)
    : max_tx_(config.max_tx),
      theta_(config.theta),
      alpha_(config.alpha),
      z_(tier_weights(config)) {
  check_max_tx(max_tx_);
  check_theta(theta_);
  fill_basis<double>(max_tx_, theta_, alpha_.delta(), excess_, moment_);
}

StpEvaluator::StpEvaluator(const StpBasis& basis, double beta)
    : beta_(beta), max_tx_(basis.max_tx()) {
  check_beta(beta);
  const std::vector<double> excess(basis.excess().begin(), basis.excess().end());
  const std::vector<double> moment(basis.moment().begin(), basis.moment().end());
  const auto binom = binomial_row<double>(max_tx_);
  for (int m = 1; m <= max_tx_; ++m) {
    st_.f.push_back(1.0 + bernstein<double>(m, beta, excess));
    st_.g.push_back(bernstein<double>(m, beta, moment));
    df_.push_back(bernstein_dbeta(m, beta, excess));
    dg_.push_back(bernstein_dbeta(m, beta, moment));
    weight_.push_back(binom[static_cast<std::size_t>(m)] * std::pow(beta, m));
  }
  hm_.w = st_.f[0];
  hm_.v = st_.g[0];
  w_minus_beta_ = (1.0 - beta) + beta * excess[1];
}

StpEvaluator::StpEvaluator(const NetworkConfig& config, double beta)
    : StpEvaluator(StpBasis(config), beta) {}

double StpEvaluator::one_slot(double s) const {
  if (s <= 0.0) return 0.0;
  return beta_ * s / (hm_.v + (hm_.w - hm_.v) * s);
}

double StpEvaluator::hm_outage(double s) const {
  if (s <= 0.0) return 1.0;
  const double ratio =
      (s * w_minus_beta_ + hm_.v * (1.0 - s)) / (hm_.v + (hm_.w - hm_.v) * s);
  return std::pow(ratio, max_tx_);
}

double StpEvaluator::hm(double s) const {
  if (s <= 0.0) return 0.0;
  const double ratio =
      (s * w_minus_beta_ + hm_.v * (1.0 - s)) / (hm_.v + (hm_.w - hm_.v) * s);
  return -std::expm1(max_tx_ * std::log(ratio));
}

double StpEvaluator::hm_ds(double s) const {
  s = std::max(s, 0.0);
  const double den = hm_.v + (hm_.w - hm_.v) * s;
  const double ratio = (s * w_minus_beta_ + hm_.v * (1.0 - s)) / den;
  const double dp = beta_ * hm_.v / (den * den);
  return max_tx_ * std::pow(ratio, max_tx_ - 1) * dp;
}

double StpEvaluator::st(double s) const {
  if (s <= 0.0) return 0.0;
  CompensatedSum acc;
  for (int m = 1; m <= max_tx_; ++m) {
    const auto i = static_cast<std::size_t>(m - 1);
    const double term = weight_[i] * s / (st_.g[i] + (st_.f[i] - st_.g[i]) * s);
    acc.add(m % 2 == 1 ? term : -term);
  }
  return acc.value();
}

double StpEvaluator::st_ds(double s) const {
  s = std::max(s, 0.0);
  CompensatedSum acc;
  for (int m = 1; m <= max_tx_; ++m) {
    const auto i = static_cast<std::size_t>(m - 1);
    const double den = st_.g[i] + (st_.f[i] - st_.g[i]) * s;
    const double term = weight_[i] * st_.g[i] / (den * den);
    acc.add(m % 2 == 1 ? term : -term);
  }
  return acc.value();
}

double StpEvaluator::st_dbeta(double s) const {
  if (s <= 0.0) return 0.0;
  CompensatedSum acc;
  for (int m = 1; m <= max_tx_; ++m) {
    const auto i = static_cast<std::size_t>(m - 1);
    const double den = st_.g[i] + (st_.f[i] - st_.g[i]) * s;
    const double dden = df_[i] * s + dg_[i] * (1.0 - s);
    const double term =
        weight_[i] * s * (m / beta_ / den - dden / (den * den));
    acc.add(m % 2 == 1 ? term : -term);
  }
  return acc.value();
}

double StpEvaluator::st_part(double s, bool odd) const {
  if (s <= 0.0) return 0.0;
  double acc = 0.0;
  for (int m = odd ? 1 : 2; m <= max_tx_; m += 2) {
    const auto i = static_cast<std::size_t>(m - 1);
    acc += weight_[i] * s / (st_.g[i] + (st_.f[i] - st_.g[i]) * s);
  }
  return acc;
}

double StpEvaluator::st_part_ds(double s, bool odd) const {
  s = std::max(s, 0.0);
  double acc = 0.0;
  for (int m = odd ? 1 : 2; m <= max_tx_; m += 2) {
    const auto i = static_cast<std::size_t>(m - 1);
    const double den = st_.g[i] + (st_.f[i] - st_.g[i]) * s;
    acc += weight_[i] * st_.g[i] / (den * den);
  }
  return acc;
}

double stp_one_slot(std::span<const double> t_n, double beta,
                    const NetworkConfig& config) {
  check_file_inputs(beta, config);
  const double s = file_hit_mass(t_n, config);
  return StpEvaluator(config, beta).one_slot(s);
}

double stp_file_hm(std::span<const double> t_n, double beta,
                   const NetworkConfig& config) {
  check_file_inputs(beta, config);
  const double s = file_hit_mass(t_n, config);
  return StpEvaluator(config, beta).hm(s);
}

double stp_file_st(std::span<const double> t_n, double beta,
                   const NetworkConfig& config) {
  check_file_inputs(beta, config);
  const double s = file_hit_mass(t_n, config);
  return StpEvaluator(config, beta).st(s);
}

StpReport stp_aggregate(const CachingPolicy& policy, const DtxPolicy& dtx,
                        Scenario scenario, const NetworkConfig& config) {
  require_valid(config, policy, dtx);
  check_max_tx(config.max_tx);
  const StpBasis basis(config);
  const StpEvaluator eval(basis, dtx.beta);
  const auto s = hit_masses(policy, basis.z());
  StpReport r;
  r.scenario = scenario;
  r.provenance = Provenance::Analytic;
  r.per_file.resize(s.size());
  r.per_file_stderr.assign(s.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t n = 0; n < s.size(); ++n) {
    r.per_file[n] = scenario == Scenario::HighMobility ? eval.hm(s[n]) : eval.st(s[n]);
    acc.add(config.catalog.popularity(static_cast<int>(n)) * r.per_file[n]);
  }
  r.aggregate = acc.value();
  return r;
}

double stp_objective(const CachingPolicy& policy, double beta, Scenario scenario,
                     const NetworkConfig& config) {
  const StpBasis basis(config);
  const StpEvaluator eval(basis, beta);
  double q = 0.0;
  for (int n = 0; n < policy.n_files(); ++n) {
    const double s = hit_mass(policy.row(n), basis.z());
    q += config.catalog.popularity(n) *
         (scenario == Scenario::HighMobility ? eval.hm(s) : eval.st(s));
  }
  return q;
}

const char* to_string(AsymptoticCase c) {
  switch (c) {
    case AsymptoticCase::CachedEverywhereNoDtx: return "i";
    case AsymptoticCase::PartialCacheNoDtx: return "ii";
    case AsymptoticCase::CachedEverywhereWithDtx: return "iii";
    case AsymptoticCase::PartialCacheWithDtx: return "iv";
  }
  return "?";
}

AsymptoticCase classify_case(std::span<const double> t_n, double beta) {
  const bool full = std::all_of(t_n.begin(), t_n.end(),
                                [](double t) { return t >= 1.0 - kCaseTolerance; });
  const bool always_on = beta >= 1.0 - kCaseTolerance;
  if (full) {
    return always_on ? AsymptoticCase::CachedEverywhereNoDtx
                     : AsymptoticCase::CachedEverywhereWithDtx;
  }
  return always_on ? AsymptoticCase::PartialCacheNoDtx
                   : AsymptoticCase::PartialCacheWithDtx;
}

OutageAsymptote outage_asymptotic(std::span<const double> t_n, double beta,
                                  Scenario scenario, const NetworkConfig& config) {
  check_file_inputs(beta, config);
  const double s = file_hit_mass(t_n, config);
  const int M = config.max_tx;
  const double theta = config.theta;
  const double alpha = config.alpha.alpha();
  const double d = config.alpha.delta();
  const double gg = gamma_product(config.alpha);

  OutageAsymptote r;
  r.id = classify_case(t_n, beta);
  if (r.id == AsymptoticCase::CachedEverywhereNoDtx ||
      r.id == AsymptoticCase::PartialCacheNoDtx) {
    beta = 1.0;
  }
  r.constant_term = std::pow(1.0 - beta, M);
  if (s <= 0.0) {
    // Nothing cached anywhere: the file is never delivered.
    r.constant_term = 1.0;
    return r;
  }
  const double miss = 1.0 / s - 1.0;

  switch (r.id) {
    case AsymptoticCase::CachedEverywhereNoDtx:
      r.c_term = scenario == Scenario::HighMobility
                     ? std::pow(theta * 2.0 / (alpha - 2.0), M)
                     : std::pow(theta, M) * recip_1f1_deriv(M, config.alpha);
      break;
    case AsymptoticCase::CachedEverywhereWithDtx:
      r.c_term = theta * std::pow(1.0 - beta, M - 1) * M * beta * beta * 2.0 /
                 (alpha - 2.0);
      break;
    case AsymptoticCase::PartialCacheNoDtx:
    case AsymptoticCase::PartialCacheWithDtx:
      if (scenario == Scenario::HighMobility) {
        r.c_term = r.id == AsymptoticCase::PartialCacheNoDtx
                       ? std::pow(theta, d * M) * std::pow(miss * gg, M)
                       : std::pow(theta, d) * std::pow(1.0 - beta, M - 1) * M *
                             beta * beta * miss * gg;
      } else {
        std::vector<double> mu(static_cast<std::size_t>(M) + 1, 0.0);
        for (int i = 1; i <= M; ++i) {
          mu[static_cast<std::size_t>(i)] = detail::interferer_moment_t<double>(i, d);
        }
        const auto binom = binomial_row<double>(M);
        CompensatedSum acc;
        for (int m = 1; m <= M; ++m) {
          const double term = binom[static_cast<std::size_t>(m)] * std::pow(beta, m) *
                              bernstein<double>(m, beta, mu);
          acc.add(m % 2 == 1 ? term : -term);
        }
        r.c_term = std::pow(theta, d) * miss * acc.value();
      }
      break;
  }
  return r;
}

double outage_file(std::span<const double> t_n, double beta, Scenario scenario,
                   const NetworkConfig& config) {
  check_file_inputs(beta, config);
  const double s = file_hit_mass(t_n, config);
  if (s <= 0.0) return 1.0;
  if (scenario == Scenario::HighMobility) {
    return StpEvaluator(config, beta).hm_outage(s);
  }
  const Wide out = static_outage_t<Wide>(config.max_tx, Wide(beta), Wide(s),
                                         Wide(config.theta), Wide(2) / Wide(config.alpha.alpha()));
  return static_cast<double>(out);
}

double diversity_gain(std::span<const double> t_n, double beta, Scenario scenario,
                      const NetworkConfig& config) {
  check_max_tx(config.max_tx);
  // An uncached file is never delivered: outage 1 at every threshold.
  if (hit_mass(t_n, tier_weights(config)) == 0.0) return 0.0;
  switch (classify_case(t_n, beta)) {
    case AsymptoticCase::CachedEverywhereNoDtx:
      return config.max_tx;
    case AsymptoticCase::PartialCacheNoDtx:
      return scenario == Scenario::HighMobility
                 ? config.max_tx * config.alpha.delta()
                 : config.alpha.delta();
    default:
      return 0.0;
  }
}

double diversity_slope(std::span<const double> t_n, double beta, Scenario scenario,
                       const NetworkConfig& config,
                       std::span<const double> theta_grid) {
  std::vector<double> grid(theta_grid.begin(), theta_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 3) {
    throw DomainError("diversity_slope: need at least 3 distinct theta values");
  }
  if (!(grid.front() > 0.0) || grid.back() > 1e-3) {
    throw DomainError("diversity_slope: theta grid must lie in (0, 1e-3]");
  }
  NetworkConfig cfg = config;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double theta : grid) {
    cfg.theta = theta;
    const double out = outage_file(t_n, beta, scenario, cfg);
    if (!(out > 0.0)) {
      throw NumericError("diversity_slope: outage underflowed at theta = " +
                         std::to_string(theta));
    }
    const double x = std::log(theta), y = std::log(out);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(grid.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hetcache
