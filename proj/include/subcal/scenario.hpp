#pragma once

// Runs the checks of a scenario and writes their artifacts.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subcal/config.hpp"

namespace subcal {

struct RunOptions {
  std::string out_dir;                // overrides the scenario's out_dir when set
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::size_t jobs = 1;
  bool verbose = false;
  double tol_scale = 1.0;             // multiplies every tolerance
};

struct CheckResult {
  std::string check;
  std::string status;  // PASS | FAIL | NOT_APPLICABLE | INDETERMINATE
  double min_margin = 0.0;  // nan when the check has no margins
  double runtime_ms = 0.0;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

struct RunResult {
  std::vector<CheckResult> checks;  // scenario order
  std::string out_dir;
  int exit_code() const;
};

/// Tolerance scale from SUBCAL_TOL_SCALE; 1 when unset. Throws ConfigError on
/// a malformed value.
double tol_scale_from_env();

/// Runs without touching the filesystem.
RunResult execute_scenario(const Scenario& scenario, const RunOptions& opts);
/// Runs and writes every CSV plus summary.json into the output directory.
RunResult run_scenario(const Scenario& scenario, const RunOptions& opts);

std::string summary_json(const RunResult& result);

/// Long-format curve_id,x,value table merged from the *_curves.csv files of a
/// results directory, with the classification table passed through. Throws
/// Error when the directory does not exist.
std::string emit_plot_data(const std::string& results_dir);

}  // namespace subcal
