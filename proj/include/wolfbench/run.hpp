#pragma once

// Resolved run configurations shared by the command-line tool, the Python
// module and report replay. A config embeds the whole population, so a
// report carrying it can be re-run without any other file.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wolfbench/secmetrics.hpp"

namespace wolfbench {

struct RunConfig {
  std::string command = "eval";  // eval | wolf | sweep
  std::string population_json;
  std::string policy;            // spec; for sweeps the policy kind alone
  std::vector<double> grid;      // sweep parameters
  EvalMode mode;
  WolfSearchOptions search;
  std::optional<std::string> calibration_path;
  unsigned jobs = 1;  // never serialized: results do not depend on it

  std::string to_json() const;
  static RunConfig from_json(std::string_view text);
};

/// EvalReport JSON for an eval config; optionally also a one-row CSV whose
/// parameter column holds the policy parameter.
std::string run_eval(const RunConfig& config, std::string* csv = nullptr);
/// Wolf certificate JSON.
std::string run_wolf(const RunConfig& config);
/// Sweep CSV including the header row.
std::string run_sweep(const RunConfig& config);
/// Dispatches on config.command.
std::string run(const RunConfig& config);

/// Re-runs the config embedded in a report or certificate.
std::string replay(std::string_view report_json, unsigned jobs = 1);

}  // namespace wolfbench
