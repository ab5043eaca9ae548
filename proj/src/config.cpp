#include "subcal/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace subcal {

using nlohmann::json;

namespace {

// Locates a key path in the source text for diagnostics: each component is
// searched after the previous one. Line 0 means not found.
std::size_t line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  bool found = false;
  for (const auto& key : path) {
    const auto at = text.find('"' + key + '"', pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string key;
    for (const auto& p : path) key += (key.empty() ? "" : ".") + p;
    const auto line = line_of(text_, path);
    std::string where = line ? "line " + std::to_string(line) + ": " : "";
    throw ConfigError(where + (key.empty() ? "<root>" : key) + ": " + what);
  }

  void only(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
    }
  }

  const json& need(const json& obj, const std::vector<std::string>& path, const std::string& key) const {
    if (!obj.contains(key)) {
      auto p = path;
      p.push_back(key);
      fail(p, "missing required key");
    }
    return obj.at(key);
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  double positive(const json& v, const std::vector<std::string>& path) const {
    const double x = number(v, path);
    if (!(x > 0.0)) fail(path, "expected a positive number");
    return x;
  }

  std::size_t count(const json& v, const std::vector<std::string>& path, std::size_t min = 1) const {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
      fail(path, "expected an integer >= " + std::to_string(min));
    }
    return v.get<std::size_t>();
  }

  std::vector<double> numbers(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto p = path;
      p.push_back(std::to_string(i));
      out.push_back(number(v[i], p));
    }
    return out;
  }

  std::vector<double> positive_grid(const json& v, const std::vector<std::string>& path) const {
    auto g = numbers(v, path);
    for (double x : g) {
      if (!(x > 0.0)) fail(path, "grid points must be positive");
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }

private:
  const std::string& text_;
};

Generator parse_generator(const Reader& rd, const json& g) {
  const std::vector<std::string> path{"generator"};
  if (!g.is_object()) rd.fail(path, "expected an object");
  const json& fam = rd.need(g, path, "family");
  if (!fam.is_string()) rd.fail({"generator", "family"}, "expected a string");
  const std::string family = fam.get<std::string>();
  auto sub = [&](const std::string& k) { return std::vector<std::string>{"generator", k}; };
  try {
    if (family == "path_laplacian" || family == "cycle_laplacian" || family == "complete_laplacian") {
      rd.only(g, path, {"family", "n"});
      const auto n = rd.count(rd.need(g, path, "n"), sub("n"), family == "cycle_laplacian" ? 3 : 2);
      if (family == "path_laplacian") return Generator::path_laplacian(n);
      if (family == "cycle_laplacian") return Generator::cycle_laplacian(n);
      return Generator::complete_laplacian(n);
    }
    if (family == "birth_death") {
      rd.only(g, path, {"family", "births", "deaths", "m"});
      const auto births = rd.numbers(rd.need(g, path, "births"), sub("births"));
      const auto deaths = rd.numbers(rd.need(g, path, "deaths"), sub("deaths"));
      std::optional<Vec> m;
      if (g.contains("m")) {
        const auto mv = rd.numbers(g.at("m"), sub("m"));
        m = Eigen::Map<const Vec>(mv.data(), static_cast<Eigen::Index>(mv.size()));
      }
      return Generator::birth_death(births, deaths, m);
    }
    if (family == "doubly_stochastic_nonsym") {
      rd.only(g, path, {"family", "n", "seed"});
      const auto n = rd.count(rd.need(g, path, "n"), sub("n"), 2);
      const auto seed = g.contains("seed") ? rd.count(g.at("seed"), sub("seed"), 0) : std::size_t{1};
      return Generator::doubly_stochastic_nonsym(n, seed);
    }
    if (family == "matrix") {
      rd.only(g, path, {"family", "rows", "m"});
      const json& rows = rd.need(g, path, "rows");
      if (!rows.is_array() || rows.empty()) rd.fail(sub("rows"), "expected a non-empty array of rows");
      const auto n = rows.size();
      Mat A(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = rd.numbers(rows[i], {"generator", "rows", std::to_string(i)});
        if (row.size() != n) rd.fail(sub("rows"), "matrix must be square");
        for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
      }
      WeightedSpace space(n);
      if (g.contains("m")) {
        const auto mv = rd.numbers(g.at("m"), sub("m"));
        if (mv.size() != n) rd.fail(sub("m"), "measure length must match the matrix");
        space = WeightedSpace(Eigen::Map<const Vec>(mv.data(), static_cast<Eigen::Index>(n)));
      }
      return Generator::from_matrix(A, space);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
  rd.fail({"generator", "family"}, "unknown generator family '" + family + "'");
}

std::pair<BernsteinFunction, std::string> parse_bernstein(const Reader& rd, const json& entry, std::size_t idx) {
  const std::vector<std::string> path{"bernstein", std::to_string(idx)};
  std::string family;
  if (entry.is_string()) {
    family = entry.get<std::string>();
  } else if (entry.is_object()) {
    const json& fam = rd.need(entry, path, "family");
    if (!fam.is_string()) rd.fail({"bernstein", "family"}, "expected a string");
    family = fam.get<std::string>();
  } else {
    rd.fail(path, "expected a family name or an object");
  }
  const json empty = json::object();
  const json& obj = entry.is_object() ? entry : empty;
  auto sub = [&](const std::string& k) { return std::vector<std::string>{"bernstein", k}; };
  try {
    if (family == "stable") {
      rd.only(obj, path, {"family", "alpha"});
      if (!obj.contains("alpha")) rd.fail(sub("alpha"), "stable needs alpha");
      const double a = rd.number(obj.at("alpha"), sub("alpha"));
      if (!(a > 0.0 && a <= 1.0)) rd.fail(sub("alpha"), "alpha must lie in (0, 1]");
      return {BernsteinFunction::stable(a), "stable_" + format_double(a)};
    }
    if (family == "log1p" || family == "rational" || family == "one_minus_exp" || family == "identity") {
      rd.only(obj, path, {"family"});
      if (family == "log1p") return {BernsteinFunction::log1p(), family};
      if (family == "rational") return {BernsteinFunction::rational(), family};
      if (family == "one_minus_exp") return {BernsteinFunction::one_minus_exp(), family};
      return {BernsteinFunction::identity(), family};
    }
    if (family == "triplet") {
      rd.only(obj, path, {"family", "a", "b", "atoms", "name"});
      const double a = obj.contains("a") ? rd.number(obj.at("a"), sub("a")) : 0.0;
      const double b = obj.contains("b") ? rd.number(obj.at("b"), sub("b")) : 0.0;
      LevyMeasure nu = LevyMeasure::zero();
      if (obj.contains("atoms")) {
        const json& atoms = obj.at("atoms");
        if (!atoms.is_array()) rd.fail(sub("atoms"), "expected an array of [location, mass] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : atoms) {
          const auto pair = rd.numbers(p, sub("atoms"));
          if (pair.size() != 2) rd.fail(sub("atoms"), "expected [location, mass]");
          pts.emplace_back(pair[0], pair[1]);
        }
        if (!pts.empty()) nu = LevyMeasure::atoms(pts);
      }
      std::string label = "triplet";
      if (obj.contains("name")) {
        if (!obj.at("name").is_string()) rd.fail(sub("name"), "expected a string");
        label = obj.at("name").get<std::string>();
      }
      return {BernsteinFunction(a, b, nu), label};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
  rd.fail(sub("family"), "unknown Bernstein family '" + family + "'");
}

RateSpec parse_rate(const Reader& rd, const json& v, const std::string& key) {
  const std::vector<std::string> path{key};
  RateSpec spec;
  if (v.is_string()) {
    if (v.get<std::string>() != "fit") rd.fail(path, "expected \"fit\" or an object");
    return spec;
  }
  if (!v.is_object()) rd.fail(path, "expected \"fit\" or an object");
  const json& kind = rd.need(v, path, "kind");
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "fit") {
    rd.only(v, path, {"kind"});
  } else if (k == "power") {
    rd.only(v, path, {"kind", "c", "p"});
    spec.kind = RateSpec::Kind::power;
    spec.c = rd.positive(rd.need(v, path, "c"), {key, "c"});
    spec.p = rd.number(rd.need(v, path, "p"), {key, "p"});
    if (spec.p == 0.0) rd.fail({key, "p"}, "use kind \"constant\" for p = 0");
    const bool up = key == "rate";
    if (up != (spec.p > 0.0)) rd.fail({key, "p"}, up ? "a Nash rate needs p > 0" : "beta and alpha need p < 0");
  } else if (k == "constant") {
    rd.only(v, path, {"kind", "value"});
    spec.kind = RateSpec::Kind::constant;
    spec.value = rd.number(rd.need(v, path, "value"), {key, "value"});
    if (spec.value < 0.0) rd.fail({key, "value"}, "expected a nonnegative value");
  } else {
    rd.fail({key, "kind"}, "expected fit, power or constant");
  }
  return spec;
}

}  // namespace

RateFunction RateSpec::build(RateFunction::Direction dir) const {
  switch (kind) {
    case Kind::power:
      return RateFunction::power(c, p);
    case Kind::constant:
      return RateFunction::constant(value, dir);
    case Kind::fit:
      break;
  }
  throw DomainError("a fitted rate has no closed form");
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "nash",   "theorem11", "theorem13",     "decay",         "g_sandwich", "converse", "ondiag",
      "super_poincare",     "weak_poincare", "okura",         "phillips_xval", "classify", "subordinate_decay"};
  return names;
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError("line " + std::to_string(line) + ": syntax error: " + e.what());
  }
  Reader rd(text);
  if (!root.is_object()) rd.fail({}, "scenario must be a JSON object");
  rd.only(root, {}, {"name", "generator", "bernstein", "rate", "beta", "alpha", "checks", "seed", "samples", "grids",
                     "tolerances", "out_dir"});

  Scenario sc;
  if (root.contains("name")) {
    if (!root["name"].is_string()) rd.fail({"name"}, "expected a string");
    sc.name = root["name"].get<std::string>();
  }
  sc.generator = parse_generator(rd, rd.need(root, {}, "generator"));

  if (root.contains("bernstein")) {
    const json& list = root["bernstein"];
    if (!list.is_array()) rd.fail({"bernstein"}, "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto [f, label] = parse_bernstein(rd, list[i], i);
      sc.bernstein.push_back(std::move(f));
      sc.labels.push_back(std::move(label));
    }
  }
  if (root.contains("rate")) sc.B = parse_rate(rd, root["rate"], "rate");
  if (root.contains("beta")) sc.beta = parse_rate(rd, root["beta"], "beta");
  if (root.contains("alpha")) sc.alpha = parse_rate(rd, root["alpha"], "alpha");

  const json& checks = rd.need(root, {}, "checks");
  if (!checks.is_array()) rd.fail({"checks"}, "expected a list of check names");
  const auto& known = known_checks();
  for (const auto& c : checks) {
    if (!c.is_string()) rd.fail({"checks"}, "check names are strings");
    const auto name = c.get<std::string>();
    if (std::find(known.begin(), known.end(), name) == known.end()) rd.fail({"checks"}, "unknown check '" + name + "'");
    if (std::find(sc.checks.begin(), sc.checks.end(), name) != sc.checks.end()) {
      rd.fail({"checks"}, "duplicate check '" + name + "'");
    }
    sc.checks.push_back(name);
  }

  if (root.contains("seed")) sc.seed = rd.count(root["seed"], {"seed"}, 0);
  if (root.contains("samples")) sc.samples = rd.count(root["samples"], {"samples"}, 1);

  if (root.contains("grids")) {
    const json& g = root["grids"];
    if (!g.is_object()) rd.fail({"grids"}, "expected an object");
    rd.only(g, {"grids"}, {"x", "t", "r", "g_r", "deltas", "decay_delta", "c0"});
    if (g.contains("x")) sc.grids.x = rd.positive_grid(g["x"], {"grids", "x"});
    if (g.contains("t")) sc.grids.t = rd.positive_grid(g["t"], {"grids", "t"});
    if (g.contains("r")) sc.grids.r = rd.positive_grid(g["r"], {"grids", "r"});
    if (g.contains("g_r")) sc.grids.g_r = rd.positive_grid(g["g_r"], {"grids", "g_r"});
    if (g.contains("deltas")) {
      sc.grids.deltas = rd.numbers(g["deltas"], {"grids", "deltas"});
      for (double d : sc.grids.deltas) {
        if (!(d > 1.0)) rd.fail({"grids", "deltas"}, "classification needs delta > 1");
      }
    }
    if (g.contains("decay_delta")) sc.grids.decay_delta = rd.positive(g["decay_delta"], {"grids", "decay_delta"});
    if (g.contains("c0")) sc.grids.c0 = rd.positive(g["c0"], {"grids", "c0"});
    if (sc.grids.t.empty()) rd.fail({"grids", "t"}, "the t-grid must not be empty");
  }

  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    if (!t.is_object()) rd.fail({"tolerances"}, "expected an object of check -> tolerance");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        rd.fail({"tolerances", it.key()}, "unknown check");
      }
      sc.tolerances[it.key()] = rd.positive(it.value(), {"tolerances", it.key()});
    }
  }
  if (root.contains("out_dir")) {
    if (!root["out_dir"].is_string()) rd.fail({"out_dir"}, "expected a string");
    sc.out_dir = root["out_dir"].get<std::string>();
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace subcal
