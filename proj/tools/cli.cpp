#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hetcache/analytics.hpp"
#include "hetcache/config_io.hpp"
#include "hetcache/errors.hpp"
#include "hetcache/model.hpp"
#include "hetcache/optimizer.hpp"
#include "hetcache/simulator.hpp"

namespace hetcache::cli {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Overrides carry full precision so that a grid value round-trips exactly.
std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(trim(part));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
}

std::string unit_of(const std::string& key) {
  const auto dot = key.find_last_of('.');
  const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  if (leaf == "theta_db") return "dB";
  if (leaf == "theta") return "lin";
  if (leaf == "window_side" || leaf == "cell_radius") return "m";
  if (leaf == "density") return "1/m^2";
  if (leaf == "power") return "W";
  if (leaf == "beta" || key.rfind("policy.", 0) == 0) return "prob";
  return "1";
}

std::vector<Scenario> scenarios_from(const std::string& name, Scenario fallback) {
  if (name.empty()) return {fallback};
  if (name == "hm" || name == "high_mobility") return {Scenario::HighMobility};
  if (name == "st" || name == "static") return {Scenario::Static};
  if (name == "both") return {Scenario::HighMobility, Scenario::Static};
  throw ConfigError("--scenario: unknown value '" + name + "' (expected hm, st or both)");
}

std::vector<std::string> spec_overrides(const RunSpec& spec) {
  std::vector<std::string> ov = spec.overrides;
  if (spec.seed) ov.push_back("simulation.seed=" + std::to_string(*spec.seed));
  if (spec.realizations) {
    ov.push_back("simulation.realizations=" + std::to_string(*spec.realizations));
  }
  if (spec.window_side) ov.push_back("simulation.window_side=" + exact(*spec.window_side));
  if (spec.workers) ov.push_back("simulation.workers=" + std::to_string(*spec.workers));
  if (spec.files) ov.push_back("simulation.files=[" + *spec.files + "]");
  return ov;
}

Document load(const RunSpec& spec, const std::vector<std::string>& extra = {}) {
  if (spec.config_path.empty()) throw ConfigError("--config is required");
  std::string text = read_text_file(spec.config_path);
  auto ov = spec_overrides(spec);
  ov.insert(ov.end(), extra.begin(), extra.end());
  std::string source = spec.config_path;
  if (!ov.empty()) {
    text = apply_overrides(text, ov, spec.config_path);
    // Line numbers now refer to the rewritten document.
    source += " (with overrides)";
  }
  Document doc = parse_document(text, source);
  if (doc.policy) {
    require_valid(doc.network, *doc.policy, doc.dtx.value_or(DtxPolicy{}));
  } else {
    require_valid(doc.network);
  }
  for (const int f : doc.simulation.files) {
    if (f < 0 || f >= doc.network.n_files()) {
      throw ConfigError(spec.config_path + ": simulation.files: file " + std::to_string(f) +
                        " outside [0, " + std::to_string(doc.network.n_files()) + ")");
    }
  }
  return doc;
}

std::vector<int> selected_files(const Document& doc) {
  if (!doc.simulation.files.empty()) return doc.simulation.files;
  std::vector<int> all(static_cast<std::size_t>(doc.network.n_files()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

struct Chosen {
  CachingPolicy policy;
  DtxPolicy dtx;
};

class Session {
 public:
  explicit Session(const RunSpec& spec) : spec_(spec) {}

  bool capped() const { return capped_.load(); }

  SolveResult solve(Scenario scenario, const Document& doc) {
    auto r = scenario == Scenario::HighMobility ? optimize_hm(doc.network, doc.solver)
                                                : alternate_optimize_st(doc.network, doc.solver);
    if (r.status == SolveStatus::IterationCap) capped_ = true;
    return r;
  }

  /// --policy file, then the config's policy, then the optimum (caching
  /// only when the config pins dtx.beta). With per_scenario unset the
  /// high-mobility optimum serves both scenarios.
  Chosen choose(const Document& doc, Scenario scenario, bool per_scenario) {
    if (!spec_.policy_path.empty()) {
      auto [p, d] = parse_policy(read_text_file(spec_.policy_path), spec_.policy_path, scenario);
      require_valid(doc.network, p, d);
      return {p, d};
    }
    if (doc.policy) return {*doc.policy, doc.dtx.value_or(DtxPolicy{})};
    if (!doc.dtx) {
      const auto r = solve(per_scenario ? scenario : Scenario::HighMobility, doc);
      return {r.policy, r.dtx};
    }
    // beta is pinned by the config: only the caching is optimized.
    const auto hm = solve(Scenario::HighMobility, doc);
    if (!per_scenario || scenario == Scenario::HighMobility) return {hm.policy, *doc.dtx};
    auto r = ccp_caching_st(doc.dtx->beta, hm.policy, doc.network, doc.solver);
    if (r.status == SolveStatus::IterationCap) capped_ = true;
    return {r.policy, *doc.dtx};
  }

 private:
  const RunSpec& spec_;
  std::atomic<bool> capped_{false};
};

template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::clamp(workers, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double popularity_mass(const NetworkConfig& cfg, const std::vector<int>& files) {
  double acc = 0.0;
  for (const int f : files) acc += cfg.catalog.popularity(f);
  return acc;
}

double file_stp(const CachingPolicy& p, double beta, Scenario sc, const NetworkConfig& cfg,
                int n) {
  return sc == Scenario::HighMobility ? stp_file_hm(p.row(n), beta, cfg)
                                      : stp_file_st(p.row(n), beta, cfg);
}

/// STP given that the request falls in `files`: sum a_n q_n / sum a_n.
double conditional_stp(const Chosen& c, Scenario sc, const NetworkConfig& cfg,
                       const std::vector<int>& files) {
  double acc = 0.0;
  for (const int f : files) acc += cfg.catalog.popularity(f) * file_stp(c.policy, c.dtx.beta, sc, cfg, f);
  return acc / popularity_mass(cfg, files);
}

std::string analyze(const RunSpec& spec, Session& session) {
  const Document doc = load(spec);
  const auto& cfg = doc.network;
  const Chosen c = session.choose(doc, Scenario::HighMobility, false);
  const double beta = c.dtx.beta;
  const auto z = tier_weights(cfg);

  std::string csv = join({"file", "popularity[prob]", "hit_mass[prob]", "beta[prob]",
                          "q_hm[prob]", "q_st[prob]", "outage_hm[prob]", "outage_st[prob]",
                          "case", "asymptote_hm[prob]", "asymptote_st[prob]",
                          "diversity_hm[1]", "diversity_st[1]"});
  for (int n = 0; n < cfg.n_files(); ++n) {
    const auto t = c.policy.row(n);
    const double qh = stp_file_hm(t, beta, cfg);
    const double qs = stp_file_st(t, beta, cfg);
    const auto ah = outage_asymptotic(t, beta, Scenario::HighMobility, cfg);
    const auto as = outage_asymptotic(t, beta, Scenario::Static, cfg);
    csv += join({std::to_string(n), num(cfg.catalog.popularity(n)), num(hit_mass(t, z)),
                 num(beta), num(qh), num(qs),
                 num(outage_file(t, beta, Scenario::HighMobility, cfg)),
                 num(outage_file(t, beta, Scenario::Static, cfg)),
                 to_string(classify_case(t, beta)), num(ah.value()), num(as.value()),
                 num(diversity_gain(t, beta, Scenario::HighMobility, cfg)),
                 num(diversity_gain(t, beta, Scenario::Static, cfg))});
  }
  const auto hm = stp_aggregate(c.policy, c.dtx, Scenario::HighMobility, cfg);
  const auto st = stp_aggregate(c.policy, c.dtx, Scenario::Static, cfg);
  csv += join({"all", num(1.0), "", num(beta), num(hm.aggregate), num(st.aggregate),
               num(1.0 - hm.aggregate), num(1.0 - st.aggregate), "", "", "", "", ""});
  return csv;
}

std::string policy_json_path(const RunSpec& spec) {
  if (!spec.policy_out.empty()) return spec.policy_out;
  if (spec.output_path.empty()) return {};
  const auto& o = spec.output_path;
  if (o.size() > 4 && o.compare(o.size() - 4, 4, ".csv") == 0) {
    return o.substr(0, o.size() - 4) + ".policy.json";
  }
  return o + ".policy.json";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("write to '" + path + "' failed");
}

std::string optimize(const RunSpec& spec, Session& session, std::ostream& err) {
  const Document doc = load(spec);
  std::vector<std::pair<Scenario, SolveResult>> results;
  for (const Scenario sc : scenarios_from(spec.scenario.empty() ? "both" : spec.scenario,
                                          Scenario::HighMobility)) {
    auto r = session.solve(sc, doc);
    err << to_string(sc) << ": objective " << num(r.objective) << ", beta " << num(r.dtx.beta)
        << ", " << r.iterations << " iterations, " << to_string(r.status)
        << ", kkt residual " << num(r.kkt_residual) << '\n';
    results.emplace_back(sc, std::move(r));
  }
  const auto json_path = policy_json_path(spec);
  if (!json_path.empty()) {
    write_file(json_path, policy_to_json(results));
  } else {
    err << "policy JSON not written (pass --policy-out or --out)\n";
  }

  std::string csv = join({"scenario", "iteration[count]", "objective[prob]"});
  for (const auto& [sc, r] : results) {
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      csv += join({to_string(sc), std::to_string(i), num(r.trace[i])});
    }
  }
  return csv;
}

std::string simulate(const RunSpec& spec, Session& session, std::ostream& err) {
  const Document doc = load(spec);
  const auto& cfg = doc.network;
  const auto scenarios = scenarios_from(spec.scenario, doc.simulation.scenario);
  if (!spec.outcomes_path.empty() && scenarios.size() != 1) {
    throw ConfigError("--outcomes needs a single scenario");
  }
  std::ofstream outcomes;
  if (!spec.outcomes_path.empty()) {
    outcomes.open(spec.outcomes_path, std::ios::binary);
    if (!outcomes) throw ConfigError("cannot open '" + spec.outcomes_path + "' for writing");
    outcomes << "realization,file,success\n";
  }
  const auto z = tier_weights(cfg);

  std::string csv = join({"scenario", "file", "popularity[prob]", "hit_mass[prob]",
                          "beta[prob]", "q_sim[prob]", "q_sim_stderr[prob]",
                          "q_analytic[prob]", "z_score[1]"});
  auto z_score = [](double sim, double an, double se) {
    return se > 0.0 ? num((sim - an) / se) : std::string{};
  };
  for (const Scenario sc : scenarios) {
    const Chosen c = session.choose(doc, sc, true);
    SimParams params = doc.simulation;
    params.scenario = sc;
    const auto est = simulate_stp(cfg, c.policy, c.dtx, params,
                                  outcomes.is_open() ? &outcomes : nullptr);
    for (std::size_t i = 0; i < est.files.size(); ++i) {
      const int n = est.files[i];
      const double an = file_stp(c.policy, c.dtx.beta, sc, cfg, n);
      csv += join({to_string(sc), std::to_string(n), num(cfg.catalog.popularity(n)),
                   num(hit_mass(c.policy.row(n), z)), num(c.dtx.beta), num(est.per_file[i]),
                   num(est.per_file_stderr[i]), num(an),
                   z_score(est.per_file[i], an, est.per_file_stderr[i])});
    }
    const double mass = popularity_mass(cfg, est.files);
    const double sim = est.mean / mass;
    const double se = est.std_error / mass;
    const double an = conditional_stp(c, sc, cfg, est.files);
    csv += join({to_string(sc), "selected", num(mass), "", num(c.dtx.beta), num(sim), num(se),
                 num(an), z_score(sim, an, se)});
    if (est.uncovered > 0) {
      err << to_string(sc) << ": " << est.uncovered
          << " (realization, file) pairs had no caching BS in the window\n";
    }
  }
  return csv;
}

std::vector<std::string> point_overrides(const SweepAxis& axis, double v) {
  std::vector<std::string> ov;
  for (const auto& key : axis.keys) {
    if (key.rfind("1-", 0) == 0) {
      ov.push_back(key.substr(2) + "=" + exact(1.0 - v));
    } else {
      ov.push_back(key + "=" + exact(v));
    }
  }
  return ov;
}

std::string sweep(const RunSpec& spec, Session& session) {
  if (!spec.sweep) throw ConfigError("sweep needs --sweep key=start:stop:steps");
  const auto& axis = *spec.sweep;
  const auto grid = axis.grid();
  const Document base = load(spec);
  const auto scenarios = scenarios_from(spec.scenario.empty() ? "both" : spec.scenario,
                                        Scenario::HighMobility);

  std::vector<std::vector<std::string>> rows(grid.size() * scenarios.size());
  auto point = [&](int gi) {
    const double v = grid[static_cast<std::size_t>(gi)];
    const Document doc = load(spec, point_overrides(axis, v));
    const auto files = selected_files(doc);
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const Scenario sc = scenarios[si];
      const Chosen c = session.choose(doc, sc, true);
      std::vector<std::string> row{num(v), to_string(sc), num(c.dtx.beta),
                                   num(conditional_stp(c, sc, doc.network, files)), "", ""};
      if (spec.simulate) {
        SimParams params = doc.simulation;
        params.scenario = sc;
        params.files = files;
        const auto est = simulate_stp(doc.network, c.policy, c.dtx, params);
        const double mass = popularity_mass(doc.network, files);
        row[4] = num(est.mean / mass);
        row[5] = num(est.std_error / mass);
      }
      rows[static_cast<std::size_t>(gi) * scenarios.size() + si] = std::move(row);
    }
  };
  // Simulations already use every worker; analytic points run side by side.
  parallel_for(static_cast<int>(grid.size()), spec.simulate ? 1 : base.simulation.workers, point);

  std::string csv = join({axis.label(), "scenario", "beta[prob]", "q_analytic[prob]",
                          "q_sim[prob]", "q_sim_stderr[prob]"});
  for (const auto& r : rows) csv += join(r);
  return csv;
}

std::string compare(const RunSpec& spec, Session& session) {
  const Document base = load(spec);
  SweepAxis axis;
  if (spec.sweep) {
    axis = *spec.sweep;
  } else {
    axis.keys = {"theta_db"};
    axis.start = axis.stop = linear_to_db(base.network.theta);
  }
  const auto grid = axis.grid();
  const auto scenarios = scenarios_from(spec.scenario.empty() ? "both" : spec.scenario,
                                        Scenario::HighMobility);
  const std::vector<Baseline> kinds{Baseline::MostPopular, Baseline::Uniform, Baseline::Iid};

  std::vector<std::vector<std::string>> rows(grid.size() * scenarios.size());
  auto point = [&](int gi) {
    const double v = grid[static_cast<std::size_t>(gi)];
    const Document doc = load(spec, point_overrides(axis, v));
    const auto& cfg = doc.network;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const Scenario sc = scenarios[si];
      const auto best = session.solve(sc, doc);
      std::vector<std::string> q{num(best.objective)};
      std::vector<std::string> b{num(best.dtx.beta)};
      for (const auto kind : kinds) {
        const auto p = baseline_policy(kind, cfg);
        DtxPolicy d;
        if (sc == Scenario::Static) d = optimize_dtx_st(p, cfg, doc.solver);
        q.push_back(num(stp_objective(p, d.beta, sc, cfg)));
        b.push_back(num(d.beta));
      }
      std::vector<std::string> row{num(v), to_string(sc)};
      row.insert(row.end(), q.begin(), q.end());
      row.insert(row.end(), b.begin(), b.end());
      rows[static_cast<std::size_t>(gi) * scenarios.size() + si] = std::move(row);
    }
  };
  parallel_for(static_cast<int>(grid.size()), base.simulation.workers, point);

  std::string csv = join({axis.label(), "scenario", "proposed[prob]", "mpc[prob]",
                          "uniform[prob]", "iid[prob]", "beta_proposed[prob]",
                          "beta_mpc[prob]", "beta_uniform[prob]", "beta_iid[prob]"});
  for (const auto& r : rows) csv += join(r);
  return csv;
}

}  // namespace

std::vector<double> SweepAxis::grid() const {
  if (steps < 1) throw ConfigError("sweep: steps must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    g[static_cast<std::size_t>(i)] =
        steps == 1 ? start : start + (stop - start) * static_cast<double>(i) / (steps - 1);
  }
  return g;
}

std::string SweepAxis::label() const {
  const std::string key = keys.empty() ? "value" : keys.front();
  return key + "[" + unit_of(key) + "]";
}

SweepAxis parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--sweep '" + text + "': expected key=start:stop:steps");
  }
  SweepAxis axis;
  axis.keys = split(text.substr(0, eq), ',');
  for (const auto& k : axis.keys) {
    if (k.empty() || k == "1-") throw ConfigError("--sweep '" + text + "': empty key");
  }
  const auto parts = split(text.substr(eq + 1), ':');
  if (parts.size() != 3) {
    throw ConfigError("--sweep '" + text + "': expected key=start:stop:steps");
  }
  axis.start = to_double(parts[0], "--sweep start");
  axis.stop = to_double(parts[1], "--sweep stop");
  const double steps = to_double(parts[2], "--sweep steps");
  if (steps < 1 || steps != std::floor(steps) || steps > 1e6) {
    throw ConfigError("--sweep '" + text + "': steps must be a positive integer");
  }
  axis.steps = static_cast<int>(steps);
  return axis;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"analyze", "optimize", "simulate", "sweep",
                                              "compare"};
  return names;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    Session session(spec);
    std::string csv;
    if (spec.command == "analyze") {
      csv = analyze(spec, session);
    } else if (spec.command == "optimize") {
      csv = optimize(spec, session, err);
    } else if (spec.command == "simulate") {
      csv = simulate(spec, session, err);
    } else if (spec.command == "sweep") {
      csv = sweep(spec, session);
    } else if (spec.command == "compare") {
      csv = compare(spec, session);
    } else {
      throw ConfigError("unknown command '" + spec.command + "'");
    }
    if (spec.output_path.empty()) {
      out << csv;
    } else {
      write_file(spec.output_path, csv);
    }
    if (session.capped()) {
      err << "warning: an optimizer stopped at its iteration cap\n";
      return kIterationCap;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random caching and random DTX in multi-tier cellular networks: closed-form "
               "STP, optimization and Monte Carlo validation.",
               "hetcache"};
  RunSpec spec;
  std::string sweep_text;

  app.add_option("command,--command", spec.command, "analyze | optimize | simulate | sweep | compare")
      ->required()
      ->check(CLI::IsMember(commands()));
  app.add_option("--config", spec.config_path, "JSON network/catalog config")->required();
  app.add_option("--out", spec.output_path, "CSV output path (default: stdout)");
  app.add_option("--set", spec.overrides, "Override a config entry, e.g. dtx.beta=0.7")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--sweep", sweep_text, "key[,1-key]=start:stop:steps");
  app.add_option("--seed", spec.seed, "Simulation seed");
  app.add_option("--realizations", spec.realizations, "Monte Carlo realizations")
      ->check(CLI::PositiveNumber);
  app.add_option("--window-side", spec.window_side, "Simulation window side (m)")
      ->check(CLI::PositiveNumber);
  app.add_option("--workers", spec.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--files", spec.files, "Comma-separated 0-based file ids to simulate");
  app.add_option("--policy", spec.policy_path, "Policy JSON (as written by optimize)");
  app.add_option("--policy-out", spec.policy_out, "optimize: policy JSON output path");
  app.add_option("--outcomes", spec.outcomes_path, "simulate: per-realization outcome CSV");
  app.add_option("--scenario", spec.scenario, "hm | st | both")
      ->check(CLI::IsMember({"hm", "st", "both", "high_mobility", "static"}));
  app.add_flag("--simulate", spec.simulate, "sweep: add Monte Carlo columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    if (!sweep_text.empty()) spec.sweep = parse_sweep(sweep_text);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return run(spec, out, err);
}

}  // namespace hetcache::cli
