#include "subcal/contractivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subcal/nash.hpp"

namespace subcal {

EtaProfile::EtaProfile(Kind kind, BernsteinFunction f, std::optional<RateFunction> B)
    : kind_(kind), f_(std::move(f)), B_(std::move(B)) {
  if (B_) {
    for (double b : B_->breakpoints()) {
      if (b > 0.0 && std::isfinite(b)) breaks_.push_back(b);
    }
  }
}

EtaProfile EtaProfile::nash(BernsteinFunction f, RateFunction B) {
  if (!B.increasing()) throw DomainError("eta needs an increasing Nash rate");
  return EtaProfile(Kind::nash, std::move(f), std::move(B));
}

EtaProfile EtaProfile::plain(BernsteinFunction f) { return EtaProfile(Kind::plain, std::move(f), std::nullopt); }

double EtaProfile::h(double u) const { return f_.eval(B_ ? (*B_)(u) : u); }

double EtaProfile::eta(double t) const {
  if (!(t > 0.0)) throw DomainError("eta needs t > 0");
  if (std::isinf(t)) return 0.0;
  quad::Options opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-12;
  // pieces between breakpoints in log u, then a certified tail
  double sum = 0.0;
  double lo = t;
  auto in_log = [this](double v) { return 1.0 / h(std::exp(v)); };
  for (double b : breaks_) {
    if (b <= lo) continue;
    sum += quad::adaptive<double>(in_log, std::log(lo), std::log(b), 0.0, opts).value;
    lo = b;
  }
  auto g = [this](double u) { return 1.0 / (u * h(u)); };
  quad::Options tail_opts;
  tail_opts.abs_tol = 1e-300;
  tail_opts.rel_tol = 1e-11;
  try {
    return sum + quad::to_infinity<double>(g, lo, 0.0, tail_opts).value;
  } catch (const QuadratureError&) {
    return kInf;
  }
}

double EtaProfile::inverse(double y) const {
  if (!(y > 0.0)) throw DomainError("eta inverse needs y > 0");
  return inverse_nonincreasing([this](double t) { return eta(t); }, y);
}

double ondiag_bound(const EtaProfile& profile, double t) {
  if (!(t > 0.0)) throw DomainError("ondiag_bound needs t > 0");
  const double x = profile.inverse(t / 2.0);
  return x == 0.0 ? kInf : 2.0 * x;
}

OndiagReport verify_ondiag(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                           const PhiFunctional& phi, const SamplerConfig& cfg, const std::vector<double>& t_grid) {
  if (!gen.symmetric()) throw DomainError("verify_ondiag needs a symmetric generator");
  OndiagReport out;
  out.bound.check = "ondiag";
  out.hypothesis = verify_nash(gen, B, phi, cfg);
  const auto profile = EtaProfile::nash(f, B);
  const bool finite = profile.finite();
  out.asserted = out.hypothesis.pass && finite;

  const Generator fa = spectral_apply(gen, f);
  const Mat pi = gen.equilibrium_projection();
  Curve measured{"ondiag_measured", {}, {}};
  Curve bound{"ondiag_bound", {}, {}};
  for (double t : t_grid) {
    const double m = norm_1_to_inf(Mat(fa.semigroup(t) - pi), gen.space());
    const double b = finite ? ondiag_bound(profile, t) : kInf;
    out.bound.add(t, 0.0, m, b, 1e-8);
    measured.xs.push_back(t);
    measured.ys.push_back(m);
    bound.xs.push_back(t);
    bound.ys.push_back(b);
  }
  out.curves = {measured, bound};
  if (!out.asserted) {
    out.bound.pass = true;
    out.bound.note = !out.hypothesis.pass ? "Nash hypothesis fails on the samples; curves only"
                                           : "eta diverges; curves only";
  } else {
    out.bound.note = "||T_t^f - Pi||_{1->inf} on the sector";
  }
  return out;
}

// Classification --------------------------------------------------------------

bool Classification::has(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

namespace {

bool within(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

Classification classify_contractivity(const BernsteinFunction& f, double delta) {
  if (!(delta > 1.0)) throw DomainError("classification needs delta > 1");
  if (f.degenerate()) throw DomainError("classification needs a non-degenerate Bernstein function");
  Classification c;
  c.family = f.family();
  c.delta = delta;

  // int_1^inf dr / f(r^delta) = (1/delta) int_1^inf u^{1/delta - 1} / f(u) du,
  // written in u so the integrand never overflows to a spurious zero
  auto g = [&](double u) { return std::pow(u, 1.0 / delta - 1.0) / (delta * f.eval(u)); };
  quad::Options opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-6;
  try {
    c.integral = quad::to_infinity<double>(g, 1.0, 0.0, opts).value;
  } catch (const QuadratureError&) {
    c.integral = kInf;
  }

  bool infinite = false;
  for (int k = 1; k <= 12; ++k) {
    const double l = std::pow(10.0, k);
    const double inv = l >= f.sup() ? kInf : f.inverse(l);
    const double q = inv / std::pow(l, delta);
    c.lambdas.push_back(l);
    c.ratios.push_back(q);
    if (!std::isfinite(q)) {
      infinite = true;
      break;
    }
  }
  const auto n = c.ratios.size();
  if (infinite) {
    c.limit_kind = "infinite";
    c.limit = kInf;
  } else {
    // log-log slopes of the ratio over the last decades
    std::vector<double> slope;
    for (std::size_t i = 1; i < n; ++i) {
      slope.push_back((std::log(c.ratios[i]) - std::log(c.ratios[i - 1])) /
                      (std::log(c.lambdas[i]) - std::log(c.lambdas[i - 1])));
    }
    const double q1 = c.ratios[n - 3], q2 = c.ratios[n - 2], q3 = c.ratios[n - 1];
    const double s1 = slope[slope.size() - 3], s2 = slope[slope.size() - 2], s3 = slope[slope.size() - 1];
    auto steady = [&](double a, double b, double d) { return within(a, b, 0.1) && within(b, d, 0.1); };
    if (within(q1, q2, 0.01) && within(q2, q3, 0.01) && within(q1, q3, 0.01)) {
      c.limit_kind = "finite";
      c.limit = q3;
    } else if (s1 < -0.01 && s2 < -0.01 && s3 < -0.01 && steady(s1, s2, s3)) {
      c.limit_kind = "zero";
      c.limit = 0.0;
    } else if (s1 > 0.01 && s2 > 0.01 && s3 > 0.01 && steady(s1, s2, s3)) {
      c.limit_kind = "infinite";
      c.limit = kInf;
    } else {
      c.limit_kind = "indeterminate";
      c.limit = q3;
    }
  }
  if (std::isfinite(c.integral)) c.labels.push_back("ultra");
  if (c.limit_kind == "zero") c.labels.push_back("super");
  if (c.limit_kind == "finite") c.labels.push_back("hyper");
  if (c.limit_kind == "infinite") c.labels.push_back("not_hyper");
  if (c.limit_kind == "indeterminate") c.labels.push_back("indeterminate");
  return c;
}

std::string classification_csv(const std::vector<Classification>& rows) {
  std::ostringstream os;
  os << "family,delta,integral,limit,limit_kind,labels\n";
  for (const auto& c : rows) {
    std::string labels;
    for (const auto& l : c.labels) labels += (labels.empty() ? "" : "+") + l;
    os << c.family << ',' << format_double(c.delta) << ',' << format_double(c.integral) << ','
       << format_double(c.limit) << ',' << c.limit_kind << ',' << labels << '\n';
  }
  return os.str();
}

// Decay inheritance -------------------------------------------------------------

double fit_decay_constant(const Generator& gen, const PhiFunctional& phi, double delta,
                          const std::vector<double>& t_grid, const SamplerConfig& cfg) {
  const auto& sp = gen.space();
  double c0 = 0.0;
  const auto samples = draw_samples(gen, phi, cfg);
  for (double t : t_grid) {
    const Mat T = gen.semigroup(t);
    for (const auto& u : samples) c0 = std::max(c0, sp.norm2_sq(T * u) * std::pow(t, delta) / phi(u));
  }
  return c0 * (1.0 + 1e-9);
}

DecayInheritance subordinate_decay_check(const Generator& gen, const BernsteinFunction& f, const PhiFunctional& phi,
                                         double delta, double c0, const std::vector<double>& t_grid,
                                         const SamplerConfig& cfg) {
  if (!gen.symmetric()) throw DomainError("decay inheritance needs a symmetric generator");
  if (t_grid.empty()) throw DomainError("decay inheritance needs a t-grid");
  const auto& sp = gen.space();
  const auto samples = draw_samples(gen, phi, cfg);
  DecayInheritance out;
  out.t_grid = t_grid;
  out.hypothesis.check = "decay_hypothesis";
  out.hypothesis.slack = 1e-10;
  out.hypothesis.kernel_excluded = cfg.exclude_kernel;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("decay t-grid must be positive");
    const Mat T = gen.semigroup(t);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double x = sp.norm2_sq(T * samples[i]);
      const double bound = c0 * phi(samples[i]) / std::pow(t, delta);
      out.hypothesis.rows.push_back(MarginRow{i, sp.norm2_sq(samples[i]), t, bound, x, bound - x});
    }
  }
  out.hypothesis.finalize();
  if (!out.hypothesis.pass) {
    throw HypothesisError("decay hypothesis ||T_t u||^2 <= c0 Phi(u)/t^delta fails (min margin " +
                          format_double(out.hypothesis.min_margin) + ")");
  }
  const auto eta = EtaProfile::plain(f);
  if (!eta.finite()) throw HypothesisError("eta(t) = int_t^inf ds/(s f(s)) diverges");

  const Generator fa = spectral_apply(gen, f);
  for (double t : t_grid) {
    const Mat T = fa.semigroup(t);
    const double scale = std::pow(eta.inverse(t), delta);
    double r = 0.0;
    for (const auto& u : samples) r = std::max(r, sp.norm2_sq(T * u) / (scale * phi(u)));
    out.ratio.push_back(r);
  }
  out.c1 = *std::max_element(out.ratio.begin(), out.ratio.end());
  out.median = median(out.ratio);
  out.pass = std::isfinite(out.c1) && out.c1 <= 1e3 * out.median;
  return out;
}

}  // namespace subcal
