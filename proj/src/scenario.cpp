#include "subcal/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "subcal/contractivity.hpp"
#include "subcal/nash.hpp"
#include "subcal/phillips.hpp"
#include "subcal/poincare.hpp"

namespace subcal {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kNeedsB{"nash", "theorem11", "theorem13", "decay", "g_sandwich", "ondiag"};

struct Context {
  const Scenario& sc;
  const Generator& gen;
  PhiFunctional phi;
  SamplerConfig cfg;
  double scale = 1.0;

  std::optional<RateFunction> B;
  std::string B_error;
  std::optional<FittedPoincare> beta_fit;
  std::optional<RateFunction> beta;
  std::string beta_error;
  std::optional<FittedPoincare> alpha_fit;
  std::optional<RateFunction> alpha;
  std::string alpha_error;

  double tol(const std::string& check, double fallback) const {
    auto it = sc.tolerances.find(check);
    return (it == sc.tolerances.end() ? fallback : it->second) * scale;
  }
  std::vector<double> poincare_grid() const {
    if (!sc.grids.r.empty()) return sc.grids.r;
    const double a = std::max(gen.norm_inf(), 1e-12);
    return log_grid(1e-3 / a, 1e3 / a, 31);
  }
};

// Aggregates the status of the pieces of one check.
struct Tally {
  bool fail = false;
  bool pass = false;
  bool indeterminate = false;
  double min_margin = kInf;
  bool has_margin = false;

  void margin(double m) {
    has_margin = true;
    if (std::isnan(m) || m < min_margin) min_margin = m;
  }
  void add(const MarginReport& r) {
    (r.pass ? pass : fail) = true;
    margin(r.min_margin);
  }
  void add_ok(bool ok) { (ok ? pass : fail) = true; }
  std::string status() const {
    if (fail) return "FAIL";
    if (indeterminate) return "INDETERMINATE";
    if (pass) return "PASS";
    return "NOT_APPLICABLE";
  }
};

void retol(MarginReport& r, const Context& ctx, const std::string& check) {
  r.slack = ctx.tol(check, r.slack);
  r.finalize();
}

BoundReport rebound(const BoundReport& in, double rel_tol) {
  BoundReport out;
  out.check = in.check;
  out.note = in.note;
  for (const auto& r : in.rows) out.add(r.x, r.lower, r.value, r.upper, rel_tol);
  return out;
}

// Smallest relative distance to either side of the bound.
double bound_margin(const BoundReport& r) {
  double m = kInf;
  for (const auto& row : r.rows) {
    auto rel = [](double lo, double hi) {
      if (std::isinf(hi) && hi > 0) return kInf;
      const double s = std::max({std::abs(lo), std::abs(hi), 1e-300});
      return (hi - lo) / s;
    };
    m = std::min({m, rel(row.lower, row.value), rel(row.value, row.upper)});
  }
  return m;
}

using MarginSeries = std::vector<std::pair<std::string, MarginReport>>;
using BoundSeries = std::vector<std::pair<std::string, BoundReport>>;

std::string margin_series_csv(const MarginSeries& series) {
  std::ostringstream os;
  os << "series,id,norm2_sq,param,lhs,rhs,margin\n";
  for (const auto& [name, rep] : series) {
    for (const auto& r : rep.rows) {
      os << name << ',' << r.id << ',' << format_double(r.norm2_sq) << ',' << format_double(r.param) << ','
         << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.margin) << '\n';
    }
  }
  return os.str();
}

std::string bound_series_csv(const BoundSeries& series) {
  std::ostringstream os;
  os << "series,x,lower,value,upper,holds\n";
  for (const auto& [name, rep] : series) {
    for (const auto& r : rep.rows) {
      os << name << ',' << format_double(r.x) << ',' << format_double(r.lower) << ',' << format_double(r.value) << ','
         << format_double(r.upper) << ',' << (r.holds ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

bool pure_jump(const BernsteinFunction& f) {
  return f.has_triplet() && f.a() == 0.0 && f.b() == 0.0 && !f.nu().is_zero();
}

struct Outcome {
  Tally tally;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> files;
};

// Each check fills an Outcome; HypothesisError and DomainError escaping a
// check mark it NOT_APPLICABLE.

void check_nash(const Context& ctx, Outcome& out) {
  auto rep = verify_nash(ctx.gen, *ctx.B, ctx.phi, ctx.cfg);
  retol(rep, ctx, "nash");
  out.tally.add(rep);
  out.files.emplace_back("nash.csv", margin_series_csv({{"A", rep}}));
}

void check_theorem(const Context& ctx, Outcome& out, const std::string& name,
                   const std::vector<NashVariant>& variants) {
  MarginSeries series;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    for (const auto& v : variants) {
      auto rep = verify_theorem(ctx.gen, ctx.sc.bernstein[i], *ctx.B, ctx.phi, v, ctx.cfg);
      retol(rep, ctx, name);
      out.tally.add(rep);
      series.emplace_back(ctx.sc.labels[i] + "/" + v.label(), std::move(rep));
    }
  }
  out.files.emplace_back(name + ".csv", margin_series_csv(series));
}

void check_decay(const Context& ctx, Outcome& out) {
  auto eq = verify_decay_equivalence(ctx.gen, *ctx.B, ctx.phi, ctx.cfg, ctx.sc.grids.t);
  retol(eq.forward, ctx, "decay");
  retol(eq.converse, ctx, "decay");
  out.tally.add(eq.forward);
  out.tally.add(eq.converse);
  out.files.emplace_back("decay.csv", margin_series_csv({{"forward", eq.forward}, {"converse", eq.converse}}));
  // worst sample per t, as a bound-vs-measured pair
  Curve bound{"decay_bound", {}, {}}, measured{"decay_measured", {}, {}};
  for (double t : ctx.sc.grids.t) {
    const MarginRow* worst = nullptr;
    for (const auto& r : eq.forward.rows) {
      if (r.param == t && (!worst || r.margin < worst->margin)) worst = &r;
    }
    if (!worst) continue;
    bound.xs.push_back(t);
    bound.ys.push_back(worst->lhs);
    measured.xs.push_back(t);
    measured.ys.push_back(worst->rhs);
  }
  out.files.emplace_back("decay_curves.csv", curves_csv({bound, measured}));
}

void check_g_sandwich(const Context& ctx, Outcome& out) {
  const DecayProfile profile(*ctx.B);
  BoundSeries series;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& f = ctx.sc.bernstein[i];
    if (!pure_jump(f)) {
      out.notes.push_back(ctx.sc.labels[i] + ": skipped, the sandwich needs a = b = 0 and a nonzero Levy measure");
      continue;
    }
    auto rep = check_g_sandwich(ctx.sc.grids.g_r, profile, f, ctx.tol("g_sandwich", 1e-6));
    out.tally.add_ok(rep.pass);
    out.tally.margin(bound_margin(rep));
    series.emplace_back(ctx.sc.labels[i], std::move(rep));
  }
  out.files.emplace_back("g_sandwich.csv", bound_series_csv(series));
}

void check_converse(const Context& ctx, Outcome& out) {
  if (!ctx.gen.symmetric()) throw DomainError("the converse needs a symmetric generator");
  MarginSeries series;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& f = ctx.sc.bernstein[i];
    const auto& label = ctx.sc.labels[i];
    try {
      ConverseNash rep;
      if (ctx.sc.B.fitted()) {
        // the f-level rate comes from fitting f(A), read back through f^{-1}
        const Generator fa = spectral_apply(ctx.gen, f);
        const auto Bf = fit_B(fa, ctx.phi, ctx.sc.grids.x, ctx.cfg).rate;
        RateFunction B(
            RateFunction::Direction::increasing,
            [f, Bf](double x) {
              const double y = Bf(x);
              return y >= f.sup() ? kInf : f.inverse(y);
            },
            "f^-1 B_f");
        rep = converse_nash_jensen(ctx.gen, f, B, draw_samples(fa, ctx.phi, ctx.cfg));
      } else {
        rep = converse_nash_jensen(ctx.gen, f, ctx.sc.B.build(RateFunction::Direction::increasing), ctx.phi, ctx.cfg);
      }
      retol(rep.a_level, ctx, "converse");
      out.tally.add(rep.a_level);
      out.tally.add(rep.jensen);
      series.emplace_back(label + "/f_level", std::move(rep.f_level));
      series.emplace_back(label + "/a_level", std::move(rep.a_level));
      series.emplace_back(label + "/jensen", std::move(rep.jensen));
    } catch (const HypothesisError& e) {
      out.notes.push_back(label + ": not applicable, " + e.what());
    } catch (const DegenerateError& e) {
      out.notes.push_back(label + ": not applicable, " + e.what());
    }
  }
  out.files.emplace_back("converse.csv", margin_series_csv(series));
}

void check_ondiag(const Context& ctx, Outcome& out) {
  if (!ctx.gen.symmetric()) throw DomainError("the on-diagonal bound needs a symmetric generator");
  BoundSeries series;
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& label = ctx.sc.labels[i];
    auto rep = verify_ondiag(ctx.gen, ctx.sc.bernstein[i], *ctx.B, ctx.phi, ctx.cfg, ctx.sc.grids.t);
    for (auto c : rep.curves) {
      c.id = label + "/" + c.id;
      curves.push_back(std::move(c));
    }
    if (!rep.asserted) {
      out.notes.push_back(label + ": " + rep.bound.note);
    } else {
      auto b = rebound(rep.bound, ctx.tol("ondiag", 1e-8));
      out.tally.add_ok(b.pass);
      out.tally.margin(bound_margin(b));
      rep.bound = std::move(b);
    }
    series.emplace_back(label, std::move(rep.bound));
  }
  out.files.emplace_back("ondiag.csv", bound_series_csv(series));
  out.files.emplace_back("ondiag_curves.csv", curves_csv(curves));
}

void poincare_chain(const Context& ctx, Outcome& out, bool super) {
  const std::string name = super ? "super_poincare" : "weak_poincare";
  if (!ctx.gen.symmetric()) throw DomainError(name + " needs a symmetric generator");
  const auto& rate_opt = super ? ctx.beta : ctx.alpha;
  if (!rate_opt) throw HypothesisError((super ? ctx.beta_error : ctx.alpha_error));
  const RateFunction& rate = *rate_opt;
  const auto& fit = super ? ctx.beta_fit : ctx.alpha_fit;
  if (fit) {
    for (const auto& w : fit->warnings) out.notes.push_back(w);
  }

  std::vector<double> grid = (!super && fit) ? fit->grid : ctx.poincare_grid();
  MarginSeries series;
  auto a_level = super ? verify_super_poincare(ctx.gen, rate, ctx.phi, ctx.cfg, grid)
                       : verify_weak_poincare(ctx.gen, rate, ctx.phi, ctx.cfg, grid);
  retol(a_level, ctx, name);
  out.tally.add(a_level);
  const bool a_ok = a_level.pass;
  series.emplace_back("A", std::move(a_level));
  if (!a_ok) {
    out.notes.push_back("subordinate levels skipped: the inequality for A fails");
  } else {
    SamplerConfig fresh = ctx.cfg;
    fresh.seed = ctx.cfg.seed + 1;
    const auto samples = poincare_samples(ctx.gen, ctx.phi, fresh);
    if (!super) {
      // alpha_f(r) reads alpha at r/4
      const auto base = grid;
      for (double r : base) grid.push_back(4.0 * r);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
      const auto& f = ctx.sc.bernstein[i];
      SubordinateEnergy fe(ctx.gen, f);
      auto rep = super ? verify_super_poincare(ctx.gen.space(), fe, subordinate_beta_rate(rate, f), ctx.phi, samples,
                                               grid, 1e-8)
                       : verify_weak_poincare(ctx.gen.space(), fe, subordinate_alpha_rate(rate, f), ctx.phi, samples,
                                              grid, 1e-8);
      retol(rep, ctx, name);
      out.tally.add(rep);
      series.emplace_back(ctx.sc.labels[i], std::move(rep));
    }
  }
  out.files.emplace_back(name + ".csv", margin_series_csv(series));
}

void check_okura(const Context& ctx, Outcome& out) {
  const auto grid = log_grid(1e-3, 1e3, 30);
  BoundSeries series;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& f = ctx.sc.bernstein[i];
    if (!pure_jump(f)) {
      out.notes.push_back(ctx.sc.labels[i] + ": skipped, the bounds need a = b = 0 and a nonzero Levy measure");
      continue;
    }
    auto rep = check_okura_bounds(f, grid, ctx.tol("okura", 1e-8));
    out.tally.add_ok(rep.pass);
    out.tally.margin(bound_margin(rep));
    series.emplace_back(ctx.sc.labels[i], std::move(rep));
  }
  out.files.emplace_back("okura.csv", bound_series_csv(series));
}

void check_phillips(const Context& ctx, Outcome& out) {
  if (!ctx.gen.symmetric()) throw DomainError("cross-validation needs a symmetric generator");
  std::ostringstream os;
  os << "series,max_rel_error,tol,pass\n";
  const double tol = ctx.tol("phillips_xval", 1e-6);
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto cv = cross_validate(ctx.gen, ctx.sc.bernstein[i], 100, ctx.cfg.seed, tol);
    out.tally.add_ok(cv.pass);
    out.tally.margin(tol - cv.max_rel_error);
    os << ctx.sc.labels[i] << ',' << format_double(cv.max_rel_error) << ',' << format_double(tol) << ','
       << (cv.pass ? 1 : 0) << '\n';
  }
  out.files.emplace_back("phillips_xval.csv", os.str());
}

void check_classify(const Context& ctx, Outcome& out) {
  std::vector<Classification> rows;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& f = ctx.sc.bernstein[i];
    if (f.degenerate()) {
      out.notes.push_back(ctx.sc.labels[i] + ": skipped, degenerate");
      continue;
    }
    for (double d : ctx.sc.grids.deltas) {
      auto c = classify_contractivity(f, d);
      c.family = ctx.sc.labels[i];
      if (c.has("ultra") && c.has("not_hyper")) {
        out.tally.fail = true;
        out.notes.push_back(c.family + " delta " + format_double(d) + ": ultra with an infinite limit");
      } else if (c.has("indeterminate")) {
        out.tally.indeterminate = true;
      } else {
        out.tally.pass = true;
      }
      rows.push_back(std::move(c));
    }
  }
  out.files.emplace_back("classify.csv", classification_csv(rows));
}

void check_subordinate_decay(const Context& ctx, Outcome& out) {
  if (!ctx.gen.symmetric()) throw DomainError("decay inheritance needs a symmetric generator");
  const double delta = ctx.sc.grids.decay_delta;
  const auto& t = ctx.sc.grids.t;
  const double c0 = ctx.sc.grids.c0 ? *ctx.sc.grids.c0 : fit_decay_constant(ctx.gen, ctx.phi, delta, t, ctx.cfg);
  std::ostringstream os;
  os << "series,t,ratio\n";
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < ctx.sc.bernstein.size(); ++i) {
    const auto& label = ctx.sc.labels[i];
    try {
      const auto rep = subordinate_decay_check(ctx.gen, ctx.sc.bernstein[i], ctx.phi, delta, c0, t, ctx.cfg);
      out.tally.add_ok(rep.pass);
      out.tally.margin(1e3 * rep.median - rep.c1);
      Curve c{label + "/decay_ratio", rep.t_grid, rep.ratio};
      for (std::size_t k = 0; k < rep.t_grid.size(); ++k) {
        os << label << ',' << format_double(rep.t_grid[k]) << ',' << format_double(rep.ratio[k]) << '\n';
      }
      curves.push_back(std::move(c));
    } catch (const HypothesisError& e) {
      out.notes.push_back(label + ": not applicable, " + e.what());
    }
  }
  out.files.emplace_back("subordinate_decay.csv", os.str());
  out.files.emplace_back("subordinate_decay_curves.csv", curves_csv(curves));
}

CheckResult run_check(const Context& ctx, const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult res;
  res.check = name;
  Outcome out;
  bool na = false;
  try {
    if ((kNeedsB.count(name) || (name == "converse" && !ctx.sc.B.fitted())) && !ctx.B) {
      throw HypothesisError("no Nash rate: " + ctx.B_error);
    }
    if (name == "nash") check_nash(ctx, out);
    else if (name == "theorem11") {
      if (!ctx.gen.symmetric()) throw DomainError("theorem11 needs a symmetric generator");
      check_theorem(ctx, out, name, {NashVariant::symmetric(), NashVariant::epsilon_sup()});
    } else if (name == "theorem13") check_theorem(ctx, out, name, {NashVariant::nonsymmetric()});
    else if (name == "decay") check_decay(ctx, out);
    else if (name == "g_sandwich") check_g_sandwich(ctx, out);
    else if (name == "converse") check_converse(ctx, out);
    else if (name == "ondiag") check_ondiag(ctx, out);
    else if (name == "super_poincare") poincare_chain(ctx, out, true);
    else if (name == "weak_poincare") poincare_chain(ctx, out, false);
    else if (name == "okura") check_okura(ctx, out);
    else if (name == "phillips_xval") check_phillips(ctx, out);
    else if (name == "classify") check_classify(ctx, out);
    else if (name == "subordinate_decay") check_subordinate_decay(ctx, out);
  } catch (const HypothesisError& e) {
    na = true;
    out.notes.push_back(std::string("hypothesis unmet: ") + e.what());
  } catch (const DomainError& e) {
    na = true;
    out.notes.push_back(std::string("not applicable: ") + e.what());
  } catch (const Error& e) {
    out.tally.fail = true;
    out.notes.push_back(std::string("error: ") + e.what());
  }
  res.status = na ? "NOT_APPLICABLE" : out.tally.status();
  res.min_margin = out.tally.has_margin ? out.tally.min_margin : kNaN;
  res.notes = std::move(out.notes);
  res.files = na ? decltype(out.files){} : std::move(out.files);
  res.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

bool wants(const Scenario& sc, const std::string& check) {
  return std::find(sc.checks.begin(), sc.checks.end(), check) != sc.checks.end();
}

}  // namespace

int RunResult::exit_code() const {
  for (const auto& c : checks) {
    if (c.status == "FAIL") return 1;
  }
  return 0;
}

double tol_scale_from_env() {
  const char* v = std::getenv("SUBCAL_TOL_SCALE");
  if (!v || !*v) return 1.0;
  char* end = nullptr;
  const double s = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(s > 0.0) || !std::isfinite(s)) {
    throw ConfigError(std::string("SUBCAL_TOL_SCALE: expected a positive number, got '") + v + "'");
  }
  return s;
}

RunResult execute_scenario(const Scenario& sc, const RunOptions& opts) {
  if (!sc.generator) throw ConfigError("scenario has no generator");
  const Generator& gen = *sc.generator;
  Context ctx{sc, gen, PhiFunctional::l1_squared(gen.space()), SamplerConfig{}, opts.tol_scale, {}, {}, {}, {}, {},
              {}, {}, {}};
  ctx.cfg.count = sc.samples;
  ctx.cfg.seed = opts.seed ? *opts.seed : sc.seed;

  // fits come first; every check reads them
  const bool need_B = std::any_of(sc.checks.begin(), sc.checks.end(),
                                  [](const std::string& c) { return kNeedsB.count(c) > 0; });
  if (need_B) {
    try {
      if (sc.B.fitted()) {
        ctx.B = fit_B(gen, ctx.phi, sc.grids.x, ctx.cfg).rate;
      } else {
        ctx.B = sc.B.build(RateFunction::Direction::increasing);
      }
    } catch (const Error& e) {
      ctx.B_error = e.what();
    }
  }
  if (wants(sc, "super_poincare")) {
    try {
      if (sc.beta.fitted()) {
        ctx.beta_fit = fit_beta(gen, ctx.phi, sc.grids.r, ctx.cfg);
        ctx.beta = ctx.beta_fit->rate;
      } else {
        ctx.beta = sc.beta.build(RateFunction::Direction::decreasing);
      }
    } catch (const Error& e) {
      ctx.beta_error = e.what();
    }
  }
  if (wants(sc, "weak_poincare")) {
    try {
      if (sc.alpha.fitted()) {
        ctx.alpha_fit = fit_alpha(gen, ctx.phi, sc.grids.r, ctx.cfg);
        ctx.alpha = ctx.alpha_fit->rate;
      } else {
        ctx.alpha = sc.alpha.build(RateFunction::Direction::decreasing);
      }
    } catch (const Error& e) {
      ctx.alpha_error = e.what();
    }
  }

  RunResult result;
  result.checks.resize(sc.checks.size());
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, sc.checks.size()));
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < sc.checks.size(); i = next++) {
      result.checks[i] = run_check(ctx, sc.checks[i]);
      if (opts.verbose) {
        std::lock_guard<std::mutex> lock(log_mu);
        const auto& r = result.checks[i];
        std::cerr << "[" << r.check << "] " << r.status << " in " << format_double(std::round(r.runtime_ms)) << " ms\n";
        for (const auto& n : r.notes) std::cerr << "  " << n << '\n';
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.out_dir = !opts.out_dir.empty() ? opts.out_dir : (!sc.out_dir.empty() ? sc.out_dir : "subcal_out");
  return result;
}

std::string summary_json(const RunResult& result) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : result.checks) {
    nlohmann::ordered_json e;
    e["check"] = c.check;
    e["status"] = c.status;
    // JSON has no infinities; non-finite margins are written as strings
    if (std::isfinite(c.min_margin)) e["min_margin"] = c.min_margin;
    else if (std::isnan(c.min_margin)) e["min_margin"] = nullptr;
    else e["min_margin"] = format_double(c.min_margin);
    e["runtime_ms"] = std::round(c.runtime_ms * 1000.0) / 1000.0;
    if (!c.notes.empty()) e["notes"] = c.notes;
    arr.push_back(std::move(e));
  }
  return arr.dump(2) + "\n";
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  auto result = execute_scenario(sc, opts);
  const fs::path dir(result.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(result.out_dir + ": cannot create output directory: " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream os(dir / name, std::ios::binary);
    os << body;
    if (!os) throw Error((dir / name).string() + ": write failed");
  };
  for (const auto& c : result.checks) {
    for (const auto& [name, body] : c.files) write(name, body);
  }
  write("summary.json", summary_json(result));
  return result;
}

std::string emit_plot_data(const std::string& results_dir) {
  const fs::path dir(results_dir);
  if (!fs::is_directory(dir)) throw Error(results_dir + ": results directory does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ostringstream os;
  os << "curve_id,x,value\n";
  const std::string suffix = "_curves.csv";
  for (const auto& p : files) {
    const auto name = p.filename().string();
    const bool curves = name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    if (!curves && name != "classify.csv") continue;
    std::ifstream in(p, std::ios::binary);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (curves) {
        os << line << '\n';
        continue;
      }
      // family,delta,integral,limit,limit_kind,labels -> two curves in delta
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      if (cols.size() < 4) throw Error(p.string() + ": malformed classification row");
      os << "classify/" << cols[0] << "/integral," << cols[1] << ',' << cols[2] << '\n';
      os << "classify/" << cols[0] << "/limit," << cols[1] << ',' << cols[3] << '\n';
    }
  }
  return os.str();
}

}  // namespace subcal
