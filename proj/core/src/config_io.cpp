#include "hetcache/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetcache/errors.hpp"

namespace hetcache {

namespace {

using nlohmann::json;

/// Best-effort line of the last key in `path` (keys matched in order).
int line_of(std::string_view text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  int skip = 0;
  for (const auto& key : path) {
    if (key.empty()) continue;
    if (std::isdigit(static_cast<unsigned char>(key.front()))) {
      skip = std::stoi(key);
      continue;
    }
    // Inside the skip-th element of an array of objects: the key repeats once per element.
    auto hit = text.find("\"" + key + "\"", pos);
    for (; skip > 0 && hit != std::string_view::npos; --skip) {
      hit = text.find("\"" + key + "\"", hit + 1);
    }
    skip = 0;
    if (hit == std::string_view::npos) break;
    pos = hit;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string join(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& p : path) {
    if (!p.empty() && std::isdigit(static_cast<unsigned char>(p.front()))) {
      out += "[" + p + "]";
    } else {
      out += (out.empty() ? "" : ".") + p;
    }
  }
  return out;
}

class Reader {
 public:
  Reader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_of(text_, path)) + ": " +
                      join(path) + ": " + what);
  }

  const json& child(const json& obj, const std::vector<std::string>& path,
                    const std::string& key) const {
    if (!obj.is_object() || !obj.contains(key)) {
      fail(path, "missing required key '" + key + "'");
    }
    return obj.at(key);
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const json& v, const std::vector<std::string>& path) const {
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    fail(path, "expected an integer");
  }

  std::string string(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  const std::string& source() const { return source_; }
  std::string_view text() const { return text_; }

 private:
  std::string_view text_;
  std::string source_;
};

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError(source + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
}

Scenario parse_scenario(const Reader& rd, const json& v, const std::vector<std::string>& path) {
  const auto s = rd.string(v, path);
  if (s == "high_mobility" || s == "hm") return Scenario::HighMobility;
  if (s == "static" || s == "st") return Scenario::Static;
  rd.fail(path, "unknown scenario '" + s + "' (expected high_mobility or static)");
}

CachingPolicy parse_matrix(const Reader& rd, const json& v, const std::vector<std::string>& path) {
  if (!v.is_array() || v.empty()) rd.fail(path, "expected a non-empty array of rows");
  const auto n_files = static_cast<int>(v.size());
  int n_tiers = -1;
  CachingPolicy p;
  for (int n = 0; n < n_files; ++n) {
    auto rp = path;
    rp.push_back(std::to_string(n));
    const auto& row = v[static_cast<std::size_t>(n)];
    if (!row.is_array()) rd.fail(rp, "expected a row array");
    if (n_tiers < 0) {
      n_tiers = static_cast<int>(row.size());
      p = CachingPolicy(n_files, n_tiers);
    } else if (static_cast<int>(row.size()) != n_tiers) {
      rd.fail(rp, "row length " + std::to_string(row.size()) + " differs from " +
                      std::to_string(n_tiers));
    }
    for (int k = 0; k < n_tiers; ++k) {
      auto ep = rp;
      ep.push_back(std::to_string(k));
      p(n, k) = rd.number(row[static_cast<std::size_t>(k)], ep);
    }
  }
  return p;
}

void parse_solver(const Reader& rd, const json& s, SolveOptions& o) {
  const std::vector<std::string> base{"solver"};
  if (!s.is_object()) rd.fail(base, "expected an object");
  for (auto it = s.begin(); it != s.end(); ++it) {
    auto p = base;
    p.push_back(it.key());
    const auto& k = it.key();
    if (k == "tol_obj") o.tol_obj = rd.number(*it, p);
    else if (k == "tol_var") o.tol_var = rd.number(*it, p);
    else if (k == "tol_kkt") o.tol_kkt = rd.number(*it, p);
    else if (k == "max_outer_iters") o.max_outer_iters = static_cast<int>(rd.integer(*it, p));
    else if (k == "max_inner_iters") o.max_inner_iters = static_cast<int>(rd.integer(*it, p));
    else if (k == "bisection_iters") o.bisection_iters = static_cast<int>(rd.integer(*it, p));
    else if (k == "gp_step_c") o.gp_step_c = rd.number(*it, p);
    else if (k == "dtx_gp_iters") o.dtx_gp_iters = static_cast<int>(rd.integer(*it, p));
    else if (k == "beta_floor") o.beta_floor = rd.number(*it, p);
    else rd.fail(p, "unknown solver option");
  }
  if (!(o.tol_obj > 0 && o.tol_var > 0 && o.tol_kkt > 0)) rd.fail(base, "tolerances must be > 0");
  if (o.max_outer_iters < 1 || o.max_inner_iters < 1 || o.bisection_iters < 1 ||
      o.dtx_gp_iters < 1) {
    rd.fail(base, "iteration caps must be >= 1");
  }
  if (!(o.beta_floor > 0.0 && o.beta_floor < 1.0)) rd.fail(base, "beta_floor must lie in (0, 1)");
}

void parse_simulation(const Reader& rd, const json& s, SimParams& sp) {
  const std::vector<std::string> base{"simulation"};
  if (!s.is_object()) rd.fail(base, "expected an object");
  for (auto it = s.begin(); it != s.end(); ++it) {
    auto p = base;
    p.push_back(it.key());
    const auto& k = it.key();
    if (k == "window_side") sp.window_side = rd.number(*it, p);
    else if (k == "realizations") sp.n_realizations = rd.integer(*it, p);
    else if (k == "seed") sp.seed = static_cast<std::uint64_t>(rd.integer(*it, p));
    else if (k == "workers") sp.workers = static_cast<int>(rd.integer(*it, p));
    else if (k == "scenario") sp.scenario = parse_scenario(rd, *it, p);
    else if (k == "files") {
      if (!it->is_array()) rd.fail(p, "expected an array of file ids");
      sp.files.clear();
      for (const auto& f : *it) sp.files.push_back(static_cast<int>(rd.integer(f, p)));
    } else {
      rd.fail(p, "unknown simulation option");
    }
  }
  if (!(sp.window_side > 0.0)) rd.fail(base, "window_side must be > 0");
  if (sp.n_realizations < 1) rd.fail(base, "realizations must be >= 1");
  if (sp.workers < 1) rd.fail(base, "workers must be >= 1");
}

/// Splits "a.b.0" into segments.
std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Document parse_document(std::string_view text, const std::string& source) {
  const json root = parse_json(text, source);
  const Reader rd(text, source);
  if (!root.is_object()) rd.fail({}, "top level must be an object");

  static const std::vector<std::string> known{"alpha", "theta", "theta_db", "max_tx", "tiers",
                                              "catalog", "policy", "dtx", "simulation", "solver"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      rd.fail({it.key()}, "unknown key");
    }
  }

  Document doc;
  NetworkConfig& cfg = doc.network;

  const double alpha = rd.number(rd.child(root, {}, "alpha"), {"alpha"});
  try {
    cfg.alpha = AlphaParams(alpha);
  } catch (const DomainError& e) {
    rd.fail({"alpha"}, e.what());
  }

  const bool has_lin = root.contains("theta");
  const bool has_db = root.contains("theta_db");
  if (has_lin == has_db) rd.fail({"theta"}, "give exactly one of theta or theta_db");
  cfg.theta = has_lin ? rd.number(root["theta"], {"theta"})
                      : db_to_linear(rd.number(root["theta_db"], {"theta_db"}));

  cfg.max_tx = static_cast<int>(rd.integer(rd.child(root, {}, "max_tx"), {"max_tx"}));

  const auto& tiers = rd.child(root, {}, "tiers");
  if (!tiers.is_array() || tiers.empty()) rd.fail({"tiers"}, "expected a non-empty array");
  for (std::size_t k = 0; k < tiers.size(); ++k) {
    const std::vector<std::string> p{"tiers", std::to_string(k)};
    const auto& t = tiers[k];
    if (!t.is_object()) rd.fail(p, "expected an object");
    TierConfig tc;
    const bool has_density = t.contains("density");
    const bool has_radius = t.contains("cell_radius");
    if (has_density == has_radius) rd.fail(p, "give exactly one of density or cell_radius");
    if (has_density) {
      tc.density = rd.number(t["density"], {"tiers", std::to_string(k), "density"});
    } else {
      const double r = rd.number(t["cell_radius"], {"tiers", std::to_string(k), "cell_radius"});
      if (!(r > 0.0)) rd.fail({"tiers", std::to_string(k), "cell_radius"}, "must be > 0");
      tc.density = 1.0 / (std::numbers::pi * r * r);
    }
    tc.power = rd.number(rd.child(t, p, "power"), {"tiers", std::to_string(k), "power"});
    tc.cache_size = static_cast<int>(
        rd.integer(rd.child(t, p, "cache_size"), {"tiers", std::to_string(k), "cache_size"}));
    cfg.tiers.push_back(tc);
  }

  const auto& cat = rd.child(root, {}, "catalog");
  if (cat.contains("popularity")) {
    const auto& pop = cat["popularity"];
    if (!pop.is_array()) rd.fail({"catalog", "popularity"}, "expected an array");
    std::vector<double> a;
    for (std::size_t n = 0; n < pop.size(); ++n) {
      a.push_back(rd.number(pop[n], {"catalog", "popularity", std::to_string(n)}));
    }
    cfg.catalog = Catalog::from_popularity(std::move(a));
  } else {
    const auto n = rd.integer(rd.child(cat, {"catalog"}, "n_files"), {"catalog", "n_files"});
    const double g = rd.number(rd.child(cat, {"catalog"}, "zipf_gamma"), {"catalog", "zipf_gamma"});
    if (n < 1) rd.fail({"catalog", "n_files"}, "must be >= 1");
    cfg.catalog = Catalog::zipf(static_cast<int>(n), g);
  }

  if (root.contains("policy")) {
    doc.policy = parse_matrix(rd, root["policy"], {"policy"});
    if (doc.policy->n_files() != cfg.n_files() || doc.policy->n_tiers() != cfg.n_tiers()) {
      rd.fail({"policy"}, "expected " + std::to_string(cfg.n_files()) + " rows of " +
                              std::to_string(cfg.n_tiers()) + " entries");
    }
  }
  if (root.contains("dtx")) {
    const auto& d = root["dtx"];
    doc.dtx = DtxPolicy{rd.number(rd.child(d, {"dtx"}, "beta"), {"dtx", "beta"})};
  }
  if (root.contains("simulation")) parse_simulation(rd, root["simulation"], doc.simulation);
  if (root.contains("solver")) parse_solver(rd, root["solver"], doc.solver);

  const auto violations = validate(cfg);
  if (!violations.empty()) {
    throw ConfigError(source + ": invalid configuration: " + describe(violations));
  }
  return doc;
}

Document load_document(const std::string& path) {
  return parse_document(read_text_file(path), path);
}

std::string apply_overrides(std::string_view text, std::span<const std::string> overrides,
                            const std::string& source) {
  json root = parse_json(text, source);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + ov + "' is not of the form key=value");
    }
    const auto keys = split_key(ov.substr(0, eq));
    const std::string raw = ov.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &root;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      const auto& k = keys[i];
      if (is_index(k) && node->is_array()) {
        const auto idx = std::stoul(k);
        if (idx >= node->size()) {
          throw ConfigError("override '" + ov + "': index " + k + " out of range");
        }
        node = &(*node)[idx];
      } else {
        if (!node->is_object()) {
          throw ConfigError("override '" + ov + "': '" + k + "' is not inside an object");
        }
        node = &(*node)[k];
      }
    }
    const auto& leaf = keys.back();
    if (is_index(leaf) && node->is_array()) {
      const auto idx = std::stoul(leaf);
      if (idx >= node->size()) {
        throw ConfigError("override '" + ov + "': index " + leaf + " out of range");
      }
      (*node)[idx] = value;
    } else {
      if (!node->is_object() && !node->is_null()) {
        throw ConfigError("override '" + ov + "': parent is not an object");
      }
      (*node)[leaf] = value;
      if (node == &root && leaf == "theta") root.erase("theta_db");
      if (node == &root && leaf == "theta_db") root.erase("theta");
      if (leaf == "density") node->erase("cell_radius");
      if (leaf == "cell_radius") node->erase("density");
      if (leaf == "zipf_gamma" || leaf == "n_files") node->erase("popularity");
    }
  }
  return root.dump(2);
}

std::string policy_to_json(const std::vector<std::pair<Scenario, SolveResult>>& results) {
  json out = json::object();
  for (const auto& [scenario, result] : results) {
    json j;
    j["objective"] = result.objective;
    j["iterations"] = result.iterations;
    j["status"] = to_string(result.status);
    j["kkt_residual"] = result.kkt_residual;
    j["dtx"] = {{"beta", result.dtx.beta}};
    json rows = json::array();
    for (int n = 0; n < result.policy.n_files(); ++n) {
      const auto r = result.policy.row(n);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["policy"] = rows;
    j["trace"] = result.trace;
    out[to_string(scenario)] = j;
  }
  return out.dump(2) + "\n";
}

std::string options_to_json(const SolveOptions& o) {
  json j{{"tol_obj", o.tol_obj},
         {"tol_var", o.tol_var},
         {"tol_kkt", o.tol_kkt},
         {"max_outer_iters", o.max_outer_iters},
         {"max_inner_iters", o.max_inner_iters},
         {"bisection_iters", o.bisection_iters},
         {"gp_step_c", o.gp_step_c},
         {"dtx_gp_iters", o.dtx_gp_iters},
         {"beta_floor", o.beta_floor}};
  return j.dump(2) + "\n";
}

std::pair<CachingPolicy, DtxPolicy> parse_policy(std::string_view text,
                                                 const std::string& source,
                                                 Scenario scenario) {
  const json root = parse_json(text, source);
  const Reader rd(text, source);
  const std::string key = to_string(scenario);
  const bool nested = root.is_object() && !root.contains("policy") && root.contains(key);
  const json& node = nested ? root[key] : root;
  const std::vector<std::string> base = nested ? std::vector<std::string>{key}
                                               : std::vector<std::string>{};
  auto path = [&](std::initializer_list<std::string> tail) {
    auto p = base;
    p.insert(p.end(), tail);
    return p;
  };
  const auto p = parse_matrix(rd, rd.child(node, base, "policy"), path({"policy"}));
  DtxPolicy d;
  if (node.contains("dtx")) {
    d.beta = rd.number(rd.child(node["dtx"], path({"dtx"}), "beta"), path({"dtx", "beta"}));
  }
  return {p, d};
}

}  // namespace hetcache
