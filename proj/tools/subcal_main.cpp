// subcal: run verification scenarios and gather plot data.
//
//   subcal run --scenario scenarios/demo.json --out results
//   subcal plot-data --results results
//
// Exit codes: 0 no FAIL, 1 at least one FAIL, 2 bad scenario or flags,
// 3 anything else.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "subcal/scenario.hpp"

namespace {

int run(const std::string& scenario_path, const subcal::RunOptions& opts) {
  const auto sc = subcal::load_scenario(scenario_path);
  const auto result = subcal::run_scenario(sc, opts);
  for (const auto& c : result.checks) {
    std::cout << c.check << ' ' << c.status << " min_margin=" << subcal::format_double(c.min_margin) << '\n';
  }
  std::cout << "results in " << result.out_dir << '\n';
  return result.exit_code();
}

int plot_data(const std::string& dir, std::string out) {
  const auto csv = subcal::emit_plot_data(dir);
  if (out.empty()) out = dir + "/plot_data.csv";
  if (out == "-") {
    std::cout << csv;
    return 0;
  }
  std::ofstream os(out, std::ios::binary);
  os << csv;
  if (!os) throw subcal::Error(out + ": write failed");
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subordination calculus verification runner"};
  app.require_subcommand(1);

  std::string scenario;
  subcal::RunOptions opts;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run the checks of a scenario");
  run_cmd->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", opts.out_dir, "Output directory (overrides out_dir)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Sampler seed (overrides the scenario)");
  run_cmd->add_option("--jobs", opts.jobs, "Checks to run in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--verbose", opts.verbose, "Per-check progress on stderr");

  std::string results, out;
  auto* plot_cmd = app.add_subcommand("plot-data", "Merge curve CSVs into one long-format table");
  plot_cmd->add_option("--results", results, "Results directory")->required();
  plot_cmd->add_option("--out", out, "Output file ('-' for stdout; default <results>/plot_data.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run_cmd) {
      if (*seed_opt) opts.seed = seed;
      opts.tol_scale = subcal::tol_scale_from_env();
      return run(scenario, opts);
    }
    return plot_data(results, out);
  } catch (const subcal::ConfigError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
