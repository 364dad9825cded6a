#pragma once

// JSON configuration files and result serialization.
//
// {
//   "alpha": 4.0,
//   "theta": 2.0,              or "theta_db": 3.0
//   "max_tx": 3,
//   "tiers": [ {"density": 5.09e-6, "power": 20, "cache_size": 25}, ... ],
//                               ("cell_radius": r stands for density 1/(pi r^2))
//   "catalog": {"n_files": 50, "zipf_gamma": 0.8}  or  {"popularity": [...]},
//   "policy": [[T_11, T_12], [T_21, T_22], ...],        optional, N rows of K
//   "dtx": {"beta": 0.9},                               optional
//   "simulation": {"window_side": 4000, "realizations": 100000, "seed": 1,
//                  "workers": 1, "scenario": "static"},  optional
//   "solver": {"tol_obj": 1e-13, "max_outer_iters": 500, ...}  optional
// }

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetcache/model.hpp"
#include "hetcache/optimizer.hpp"
#include "hetcache/simulator.hpp"

namespace hetcache {

struct Document {
  NetworkConfig network;
  std::optional<CachingPolicy> policy;
  std::optional<DtxPolicy> dtx;
  SimParams simulation;
  SolveOptions solver;
};

/// Throws ConfigError naming the source, line and key path of the problem.
Document parse_document(std::string_view text, const std::string& source = "<config>");
Document load_document(const std::string& path);

/// Applies "a.b.0.c=value" assignments to JSON text. Values are read as JSON
/// when they parse, otherwise as strings. Setting theta removes theta_db and
/// vice versa.
std::string apply_overrides(std::string_view text, std::span<const std::string> overrides,
                            const std::string& source = "<config>");

std::string read_text_file(const std::string& path);

/// {"<scenario>": {"objective", "status", "dtx", "policy", "trace", ...}, ...}
std::string policy_to_json(const std::vector<std::pair<Scenario, SolveResult>>& results);
std::string options_to_json(const SolveOptions& opts);

/// Reads {"policy": [[...]], "dtx": {"beta": b}}. When the top level has no
/// "policy" but a key named after `scenario`, that entry is read instead
/// (the layout written by `optimize` for both scenarios).
std::pair<CachingPolicy, DtxPolicy> parse_policy(std::string_view text,
                                                 const std::string& source,
                                                 Scenario scenario);

}  // namespace hetcache
