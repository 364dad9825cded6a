#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hetcache::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericFailure = 3,
  kIterationCap = 4,
};

/// key[,key...]=start:stop:steps. A key written as "1-path" receives
/// 1 - value, so complementary entries can move together.
struct SweepAxis {
  std::vector<std::string> keys;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  std::vector<double> grid() const;
  /// Header label of the swept value, e.g. "theta_db[dB]".
  std::string label() const;
};

SweepAxis parse_sweep(const std::string& text);

struct RunSpec {
  std::string command;
  std::string config_path;
  std::string output_path;  ///< empty writes to the output stream
  std::vector<std::string> overrides;
  std::optional<SweepAxis> sweep;

  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> realizations;
  std::optional<double> window_side;
  std::optional<int> workers;
  std::optional<std::string> files;  ///< "0,3,7"

  std::string policy_path;   ///< policy JSON to evaluate instead of the config's
  std::string policy_out;    ///< optimize: where the policy JSON goes
  std::string outcomes_path; ///< simulate: per-realization outcomes CSV
  std::string scenario;      ///< "hm", "st", "both"; empty picks the command default
  bool simulate = false;     ///< sweep: add Monte Carlo columns
};

const std::vector<std::string>& commands();

/// Runs one command. CSV goes to spec.output_path or `out`; diagnostics to `err`.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and calls run().
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hetcache::cli
