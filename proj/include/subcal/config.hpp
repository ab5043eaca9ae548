#pragma once

// Scenario files: JSON text describing a generator, a list of Bernstein
// functions, rate specifications and the checks to run.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subcal/bernstein.hpp"
#include "subcal/operator.hpp"
#include "subcal/rate.hpp"

namespace subcal {

/// Schema or syntax problem in a scenario; the message carries the line and
/// the key path.
class ConfigError : public Error {
public:
  using Error::Error;
};

struct RateSpec {
  enum class Kind { fit, power, constant };
  Kind kind = Kind::fit;
  double c = 1.0;
  double p = 1.0;
  double value = 0.0;

  bool fitted() const { return kind == Kind::fit; }
  RateFunction build(RateFunction::Direction dir) const;
};

struct Grids {
  std::vector<double> x;       // fit_B grid; empty asks for the default
  std::vector<double> t{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> r;       // Poincare grid; empty asks for the default
  std::vector<double> g_r{0.5, 1.0, 2.0};
  std::vector<double> deltas{1.5, 2.0, 3.0};
  double decay_delta = 0.5;
  std::optional<double> c0;    // decay constant; fitted when absent
};

struct Scenario {
  std::string name = "scenario";
  std::optional<Generator> generator;
  std::vector<BernsteinFunction> bernstein;
  std::vector<std::string> labels;  // one per Bernstein function
  RateSpec B;
  RateSpec beta;
  RateSpec alpha;
  std::vector<std::string> checks;
  std::uint64_t seed = 1;
  std::size_t samples = 200;
  Grids grids;
  std::map<std::string, double> tolerances;  // per-check overrides
  std::string out_dir;
};

/// Every check name the runner knows, in dependency order.
const std::vector<std::string>& known_checks();

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace subcal
