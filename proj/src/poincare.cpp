#include "subcal/poincare.hpp"

#include <algorithm>
#include <cmath>

#include "subcal/nash.hpp"

namespace subcal {

namespace {

constexpr std::size_t kSupGrid = 128;

// sup of obj over a log grid on [lo, hi] with the listed points added, then
// Brent refinement around the best node. A grid sup never exceeds the true sup.
double grid_sup(double lo, double hi, std::vector<double> extra, const std::function<double(double)>& obj) {
  auto grid = log_grid(lo, hi, kSupGrid);
  for (double e : extra) {
    if (e >= lo && e <= hi) grid.push_back(e);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return maximize_on_grid(grid, obj).value;
}

void require_decreasing(const RateFunction& r, const char* what) {
  if (r.increasing()) throw DomainError(std::string(what) + " must be a decreasing rate function");
}

double f_at(const BernsteinFunction& f, double x) { return std::isinf(x) ? f.sup() : f.eval(x); }

}  // namespace

double beta_to_B(const RateFunction& beta, double x) {
  require_decreasing(beta, "beta");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("beta_to_B needs finite x > 0");
  if (!std::isinf(beta(0.0)) || beta(kInf) != 0.0) {
    throw DomainError("beta_to_B needs beta(0+) = inf and beta(inf) = 0");
  }
  const double s1 = beta.inverse(x);
  const double s2 = beta.inverse(x / 2.0);
  if (!(s1 > 0.0) || !std::isfinite(s2)) throw RangeError("beta^{-1} is not positive and finite at " + format_double(x));
  auto obj = [&](double s) { return (1.0 - beta(s) / x) / s; };
  const double value = grid_sup(s1, 2.0 * s2, {s2}, obj);
  const double lower = 1.0 / (2.0 * s2);
  const double upper = 1.0 / s1;
  if (value < lower * (1.0 - 1e-8) || value > upper * (1.0 + 1e-8)) {
    throw Error("beta_to_B sandwich violated at x = " + format_double(x));
  }
  return value;
}

double subordinate_beta(const RateFunction& beta, const BernsteinFunction& f, double r) {
  if (!(r > 0.0)) throw DomainError("subordinate_beta needs r > 0");
  const double y = 2.0 / r;
  const double inv = y >= f.sup() ? kInf : f.inverse(y);
  return 4.0 * beta(1.0 / (2.0 * inv));
}

namespace {

double alpha_f_from(double a, const BernsteinFunction& f) {
  const double arg = 1.0 / (2.0 * a);
  const double v = f_at(f, arg);
  if (v == 0.0) {
    if (arg == 0.0) return kInf;
    throw DegenerateError("f vanishes at " + format_double(arg));
  }
  return 2.0 / v;
}

}  // namespace

double subordinate_alpha(const RateFunction& alpha, const BernsteinFunction& f, double r) {
  if (!(r > 0.0)) throw DomainError("subordinate_alpha needs r > 0");
  return alpha_f_from(alpha(r / 4.0), f);
}

double converse_beta(const RateFunction& beta_f, const BernsteinFunction& f, double r) {
  if (!(r > 0.0)) throw DomainError("converse_beta needs r > 0");
  const double v = f_at(f, 1.0 / r);
  return 2.0 * beta_f(v == 0.0 ? kInf : 1.0 / (2.0 * v));
}

RateFunction subordinate_beta_rate(const RateFunction& beta, const BernsteinFunction& f) {
  return RateFunction(RateFunction::Direction::decreasing,
                      [beta, f](double r) { return subordinate_beta(beta, f, r); }, "beta_f",
                      4.0 * beta(0.0), 4.0 * beta(kInf));
}

RateFunction subordinate_alpha_rate(const RateFunction& alpha, const BernsteinFunction& f) {
  return RateFunction(RateFunction::Direction::decreasing,
                      [alpha, f](double r) { return subordinate_alpha(alpha, f, r); }, "alpha_f",
                      alpha_f_from(alpha(0.0), f), alpha_f_from(alpha(kInf), f));
}

// Verification ----------------------------------------------------------------

std::vector<Vec> poincare_samples(const Generator& gen, const PhiFunctional& phi, const SamplerConfig& cfg) {
  SamplerConfig c = cfg;
  c.exclude_kernel = false;
  auto out = draw_samples(gen, phi, c);
  const Mat& K = gen.kernel();
  for (Eigen::Index j = 0; j < K.cols(); ++j) out.push_back(phi.normalize(K.col(j)));
  return out;
}

namespace {

std::vector<double> default_r_grid(const Generator& gen) {
  const double a = gen.norm_inf();
  return log_grid(1e-3 / std::max(a, 1e-300), 1e3 / std::max(a, 1e-300), 31);
}

}  // namespace

MarginReport verify_super_poincare(const WeightedSpace& space, const EnergyFn& energy,
                                   const RateFunction& beta, const PhiFunctional& phi,
                                   const std::vector<Vec>& samples, const std::vector<double>& r_grid,
                                   double slack) {
  MarginReport rep;
  rep.check = "super_poincare";
  rep.slack = slack;
  std::vector<double> b(r_grid.size());
  for (std::size_t k = 0; k < r_grid.size(); ++k) b[k] = beta(r_grid[k]);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    const double x = space.norm2_sq(u);
    const double e = energy(u);
    const double p = phi(u);
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      const double lhs = r_grid[k] * e + (p == 0.0 ? 0.0 : b[k] * p);
      rep.rows.push_back(MarginRow{i, x, r_grid[k], lhs, x, lhs - x});
    }
  }
  rep.finalize();
  return rep;
}

MarginReport verify_super_poincare(const Generator& gen, const RateFunction& beta, const PhiFunctional& phi,
                                   const SamplerConfig& cfg, const std::vector<double>& r_grid) {
  const auto grid = r_grid.empty() ? default_r_grid(gen) : r_grid;
  return verify_super_poincare(gen.space(), [&gen](const Vec& u) { return gen.energy(u); }, beta, phi,
                               poincare_samples(gen, phi, cfg), grid);
}

MarginReport verify_weak_poincare(const WeightedSpace& space, const EnergyFn& energy,
                                  const RateFunction& alpha, const PhiFunctional& phi,
                                  const std::vector<Vec>& samples, const std::vector<double>& r_grid,
                                  double slack) {
  MarginReport rep;
  rep.check = "weak_poincare";
  rep.slack = slack;
  std::vector<double> a(r_grid.size());
  for (std::size_t k = 0; k < r_grid.size(); ++k) a[k] = alpha(r_grid[k]);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    const double x = space.norm2_sq(u);
    const double e = energy(u);
    const bool null_energy = e <= 1e-12 * x;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      const double term = std::isinf(a[k]) && null_energy ? 0.0 : a[k] * e;
      const double lhs = term + r_grid[k] * phi(u);
      rep.rows.push_back(MarginRow{i, x, r_grid[k], lhs, x, lhs - x});
    }
  }
  rep.finalize();
  return rep;
}

MarginReport verify_weak_poincare(const Generator& gen, const RateFunction& alpha, const PhiFunctional& phi,
                                  const SamplerConfig& cfg, const std::vector<double>& r_grid) {
  std::vector<double> grid = r_grid;
  if (grid.empty()) grid = fit_alpha(gen, phi, {}, cfg).grid;
  return verify_weak_poincare(gen.space(), [&gen](const Vec& u) { return gen.energy(u); }, alpha, phi,
                              poincare_samples(gen, phi, cfg), grid);
}

// Fits --------------------------------------------------------------------------

namespace {

struct Candidate {
  Vec u;
  double x;  // ||u||^2, Phi(u) = 1
  double e;  // <Au,u>
};

std::vector<Candidate> poincare_pool(const Generator& gen, const PhiFunctional& phi, const SamplerConfig& cfg) {
  const auto& sp = gen.space();
  std::vector<Candidate> pool;
  auto add = [&](const Vec& v) {
    if (!(phi(v) > 0.0)) return;
    Vec u = phi.normalize(v);
    pool.push_back(Candidate{u, sp.norm2_sq(u), gen.energy(u)});
  };
  for (const auto& u : poincare_samples(gen, phi, cfg)) add(u);
  const auto n = static_cast<Eigen::Index>(gen.n());
  for (Eigen::Index i = 0; i < n; ++i) add(Vec::Unit(n, i));
  const Mat& V = gen.eigenvectors();
  const Mat& K = gen.kernel();
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    add(V.col(j));
    // kernel directions tilted towards each eigenvector
    for (Eigen::Index k = 0; k < K.cols(); ++k) {
      for (double t : {0.01, 0.1, 0.3, 1.0}) {
        add(K.col(k) + t * V.col(j));
        add(K.col(k) - t * V.col(j));
      }
    }
  }
  return pool;
}

void require_symmetric(const Generator& gen, const char* what) {
  if (!gen.symmetric()) throw DomainError(std::string(what) + " needs a symmetric generator");
}

// Largest objective value over the pool, refined by local search from the
// best few members; refined vectors join the pool.
double pool_max(std::vector<Candidate>& pool, const Generator& gen, const PhiFunctional& phi,
                const std::function<double(const Candidate&)>& score) {
  const auto& sp = gen.space();
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, idx.size())),
                    idx.end(), [&](std::size_t a, std::size_t b) { return score(pool[a]) > score(pool[b]); });
  auto obj = [&](const Vec& u) { return score(Candidate{u, sp.norm2_sq(u), gen.energy(u)}); };
  auto identity = [](const Vec& u) { return u; };
  const std::size_t top = std::min<std::size_t>(3, idx.size());
  for (std::size_t k = 0; k < top; ++k) {
    auto res = local_search(pool[idx[k]].u, obj, identity, phi);
    pool.push_back(Candidate{res.u, sp.norm2_sq(res.u), gen.energy(res.u)});
  }
  double best = -kInf;
  for (const auto& c : pool) best = std::max(best, score(c));
  return best;
}

}  // namespace

FittedPoincare fit_beta(const Generator& gen, const PhiFunctional& phi, std::vector<double> r_grid,
                        const SamplerConfig& cfg) {
  require_symmetric(gen, "fit_beta");
  if (r_grid.empty()) {
    r_grid = gen.norm_inf() > 0.0 ? default_r_grid(gen) : log_grid(1e-3, 1e3, 31);
  }
  std::sort(r_grid.begin(), r_grid.end());
  r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
  if (!(r_grid.front() > 0.0)) throw DomainError("super-Poincare grid points must be positive");

  auto pool = poincare_pool(gen, phi, cfg);
  for (double r : r_grid) {
    pool_max(pool, gen, phi, [r](const Candidate& c) { return c.x - r * c.e; });
  }
  // r -> 0: the norm-comparison constant sup ||u||^2 over Phi(u) = 1
  const double c0 = pool_max(pool, gen, phi, [](const Candidate& c) { return c.x; });

  FittedPoincare fit{RateFunction::constant(1.0, RateFunction::Direction::decreasing), r_grid, {}, {}, 0.0, c0};
  std::vector<double> vals;
  for (double r : r_grid) {
    double v = -kInf;
    for (const auto& c : pool) v = std::max(v, c.x - r * c.e);
    vals.push_back(v);
  }
  fit.raw = vals;
  // nonincreasing envelope from above: running max from the right
  for (std::size_t k = vals.size() - 1; k-- > 0;) vals[k] = std::max(vals[k], vals[k + 1]);
  for (auto& v : vals) {
    if (v < 0.0) {
      fit.warnings.push_back("negative beta estimate clamped to 0");
      v = 0.0;
    }
  }
  const double top = std::max(c0, vals.front());
  fit.at_zero = top;
  const double last = vals.back();
  fit.rate = RateFunction::step(RateFunction::Direction::decreasing, r_grid, vals,
                                [top](double) { return top; }, [last](double) { return last; }, {}, top, last,
                                "fitted beta");
  return fit;
}

FittedPoincare fit_alpha(const Generator& gen, const PhiFunctional& phi, std::vector<double> r_grid,
                         const SamplerConfig& cfg) {
  require_symmetric(gen, "fit_alpha");
  const auto& sp = gen.space();
  auto pool = poincare_pool(gen, phi, cfg);
  const double e_scale = std::max(1.0, gen.norm_inf());
  auto positive_energy = [&](const Candidate& c) { return c.e > 1e-12 * e_scale * c.x; };

  // r_min: sup of ||u||^2 over the kernel slice, searched inside the kernel
  double r_min = 0.0;
  const Mat& K = gen.kernel();
  if (K.cols() > 0) {
    auto to_kernel = [&](const Vec& u) {
      Vec out = Vec::Zero(u.size());
      for (Eigen::Index j = 0; j < K.cols(); ++j) out += sp.inner(u, K.col(j)) * K.col(j);
      return out;
    };
    auto obj = [&](const Vec& u) { return sp.norm2_sq(u); };
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      r_min = std::max(r_min, sp.norm2_sq(phi.normalize(K.col(j))));
      if (K.cols() > 1) {
        r_min = std::max(r_min, local_search(phi.normalize(K.col(j)), obj, to_kernel, phi).value);
      }
    }
  }
  const double r_top = pool_max(pool, gen, phi, [](const Candidate& c) { return c.x; });

  if (r_grid.empty()) {
    if (r_min > 0.0) {
      for (double t : log_grid(1e-3, 1.0, 24)) r_grid.push_back(r_min + (r_top - r_min) * t);
    } else {
      r_grid = log_grid(1e-3 * r_top, r_top, 24);
    }
  }
  std::sort(r_grid.begin(), r_grid.end());
  r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());

  FittedPoincare fit{RateFunction::constant(1.0, RateFunction::Direction::decreasing), {}, {}, {}, r_min, kInf};
  for (double r : r_grid) {
    if (!(r > 0.0)) throw DomainError("weak Poincare grid points must be positive");
    if (r <= r_min * (1.0 + 1e-12)) {
      fit.warnings.push_back("grid point " + format_double(r) + " at or below r_min = " + format_double(r_min) +
                             " dropped");
      continue;
    }
    fit.grid.push_back(r);
  }
  if (fit.grid.empty()) throw DomainError("no weak Poincare grid point above r_min");

  auto score_at = [&](double r) {
    return [&, r](const Candidate& c) { return positive_energy(c) ? (c.x - r) / c.e : -kInf; };
  };
  for (double r : fit.grid) pool_max(pool, gen, phi, score_at(r));
  std::vector<double> vals;
  for (double r : fit.grid) {
    double v = 0.0;
    const auto score = score_at(r);
    for (const auto& c : pool) v = std::max(v, score(c));
    vals.push_back(v);
  }
  fit.raw = vals;
  for (std::size_t k = vals.size() - 1; k-- > 0;) vals[k] = std::max(vals[k], vals[k + 1]);
  const double last = vals.back();
  fit.rate = RateFunction::step(RateFunction::Direction::decreasing, fit.grid, vals,
                                [](double) { return kInf; }, [last](double) { return last; }, {}, kInf, last,
                                "fitted alpha");
  return fit;
}

// Theta transforms ------------------------------------------------------------

ThetaTransform::ThetaTransform(Kind kind, RateFunction rate, BernsteinFunction f)
    : kind_(kind), rate_(std::move(rate)), f_(std::move(f)) {
  require_decreasing(rate_, "Theta rate");
}

ThetaTransform ThetaTransform::super(RateFunction beta, BernsteinFunction f) {
  return ThetaTransform(Kind::super, std::move(beta), std::move(f));
}

ThetaTransform ThetaTransform::weak(RateFunction alpha, BernsteinFunction f) {
  return ThetaTransform(Kind::weak, std::move(alpha), std::move(f));
}

double ThetaTransform::theta(double x) const {
  if (!(x > 0.0)) throw DomainError("Theta needs x > 0");
  if (kind_ == Kind::super) {
    // sup_s f(g(s)) = f(sup_s g(s)) for increasing continuous f
    return x / 2.0 * f_at(f_, beta_to_B(rate_, x / 2.0));
  }
  auto g = [&](double s) { return (1.0 - 2.0 * s / x) / rate_(s); };
  const double half = x / 2.0;
  const double sup = grid_sup(half * 1e-9, half * (1.0 - 1e-12), {x / 4.0}, g);
  return x / 2.0 * f_at(f_, std::max(sup, 0.0));
}

double ThetaTransform::theta0(double x) const {
  if (!(x > 0.0)) throw DomainError("Theta_0 needs x > 0");
  const double q = kind_ == Kind::super ? rate_.inverse(x / 4.0) : rate_(x / 4.0);
  return x / 2.0 * f_at(f_, 1.0 / (2.0 * q));
}

double ThetaTransform::theta0_inverse(double y) const {
  if (!(y > 0.0)) throw DomainError("Theta_0^{-1} needs y > 0");
  const double x = inverse_nondecreasing([this](double t) { return theta0(t); }, y);
  if (std::isinf(x)) throw RangeError("Theta_0 never reaches " + format_double(y));
  return x;
}

double ThetaTransform::beta_tilde(double r) const {
  if (!(r > 0.0)) throw DomainError("beta_tilde needs r > 0");
  return grid_sup(1e-8, 1e8, {}, [&](double x) { return x - r * theta(x); });
}

double ThetaTransform::alpha_tilde(double r) const {
  if (!(r > 0.0)) throw DomainError("alpha_tilde needs r > 0");
  return grid_sup(r * (1.0 + 1e-9), r * 1e8, {}, [&](double x) { return (x - r) / theta0(x); });
}

// Converse ---------------------------------------------------------------------

JensenStep jensen_step(const BernsteinFunction& f, const Vec& lambdas, const Vec& weights) {
  if (lambdas.size() != weights.size()) throw DomainError("Jensen step needs matching sizes");
  if ((weights.array() < 0.0).any()) throw DomainError("Jensen weights must be nonnegative");
  const double total = weights.sum();
  if (!(total > 0.0)) throw DomainError("Jensen weights must have positive mass");
  double mean_f = 0.0;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    mean_f += f.eval(lambdas(i)) * weights(i) / total;
    mean += lambdas(i) * weights(i) / total;
  }
  return JensenStep{f.inverse(mean_f), mean};
}

ConverseNash converse_nash_jensen(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                                  const std::vector<Vec>& samples) {
  require_symmetric(gen, "converse_nash_jensen");
  if (f.degenerate()) throw DomainError("converse needs a non-degenerate Bernstein function");
  const auto& sp = gen.space();
  SubordinateEnergy fe(gen, f);
  ConverseNash out;
  out.f_level.check = "converse_f_level";
  out.f_level.slack = 1e-10;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = sp.norm2_sq(samples[i]);
    const double lhs = fe(samples[i]);
    const double rhs = x * f.eval(B(x));
    out.f_level.rows.push_back(MarginRow{i, x, 0.0, lhs, rhs, lhs - rhs});
  }
  out.f_level.finalize();
  if (!out.f_level.pass) {
    throw HypothesisError("f-level Nash inequality fails on the samples (min margin " +
                          format_double(out.f_level.min_margin) + ")");
  }
  out.a_level = verify_nash(gen, B, samples, 1e-8);
  out.a_level.check = "converse_a_level";

  const Vec& lam = gen.eigenvalues();
  const Mat& V = gen.eigenvectors();
  out.jensen.check = "jensen_step";
  out.jensen.slack = 1e-12;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    Vec w(lam.size());
    for (Eigen::Index j = 0; j < lam.size(); ++j) w(j) = std::pow(sp.inner(u, V.col(j)), 2);
    const auto js = jensen_step(f, lam, w);
    out.jensen.rows.push_back(MarginRow{i, sp.norm2_sq(u), 0.0, js.rhs, js.lhs, js.rhs - js.lhs});
  }
  out.jensen.finalize();
  return out;
}

ConverseNash converse_nash_jensen(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                                  const PhiFunctional& phi, const SamplerConfig& cfg) {
  auto out = converse_nash_jensen(gen, f, B, draw_samples(gen, phi, cfg));
  out.a_level.kernel_excluded = out.f_level.kernel_excluded = cfg.exclude_kernel;
  return out;
}

}  // namespace subcal
