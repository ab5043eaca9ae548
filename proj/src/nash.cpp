#include "subcal/nash.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "subcal/phillips.hpp"

namespace subcal {

// DecayProfile ------------------------------------------------------------------

DecayProfile::DecayProfile(RateFunction B) : B_(std::move(B)) {
  if (!B_.increasing()) throw DomainError("decay profile needs an increasing rate function");
  for (double s : log_grid(1e-8, 1e8, 33)) {
    const double b = B_(s);
    if (!(b > 0.0) || std::isnan(b)) {
      throw DomainError("rate function must be positive; B(" + format_double(s) + ") = " + format_double(b));
    }
  }
  log_breaks_.push_back(0.0);
  for (double x : B_.breakpoints()) {
    if (x > 0.0 && std::isfinite(x)) log_breaks_.push_back(std::log(x));
  }
  std::sort(log_breaks_.begin(), log_breaks_.end());
  log_breaks_.erase(std::unique(log_breaks_.begin(), log_breaks_.end()), log_breaks_.end());
  // cumulative G at every break
  cum_.assign(log_breaks_.size(), 0.0);
  const auto zero_at = static_cast<std::size_t>(
      std::find(log_breaks_.begin(), log_breaks_.end(), 0.0) - log_breaks_.begin());
  for (std::size_t j = zero_at + 1; j < log_breaks_.size(); ++j) {
    cum_[j] = cum_[j - 1] + piece(log_breaks_[j - 1], log_breaks_[j]);
  }
  for (std::size_t j = zero_at; j-- > 0;) {
    cum_[j] = cum_[j + 1] - piece(log_breaks_[j], log_breaks_[j + 1]);
  }
  // G(inf): remaining integral past the last break
  const double last = log_breaks_.back();
  auto h = [this, last](double v) { return 0.5 / B_(std::exp(v + last)); };
  try {
    quad::Options opts;
    g_sup_ = cum_.back() + quad::detail::doubling_panels<double>(h, 700.0, 0.0, opts, "G(inf)").value;
  } catch (const QuadratureError&) {
    g_sup_ = kInf;
  }
}

double DecayProfile::piece(double a, double b) const {
  if (a == b) return 0.0;
  auto h = [this](double v) { return 0.5 / B_(std::exp(v)); };
  quad::Options opts;
  opts.abs_tol = 1e-15;
  opts.rel_tol = 1e-13;
  return quad::adaptive<double>(h, a, b, 0.0, opts).value;
}

double DecayProfile::integrate_log(double a, double b) const {
  if (a > b) return -integrate_log(b, a);
  double sum = 0.0;
  double lo = a;
  for (double br : log_breaks_) {
    if (br <= lo) continue;
    if (br >= b) break;
    sum += piece(lo, br);
    lo = br;
  }
  return sum + piece(lo, b);
}

double DecayProfile::G(double x) const {
  if (std::isnan(x) || x < 0.0) throw DomainError("G is defined on [0, inf]");
  if (x == 0.0) return -kInf;
  if (std::isinf(x)) return g_sup_;
  const double v = std::log(x);
  auto it = std::upper_bound(log_breaks_.begin(), log_breaks_.end(), v);
  std::size_t j = it == log_breaks_.begin() ? 0 : static_cast<std::size_t>(it - log_breaks_.begin()) - 1;
  return cum_[j] + piece(log_breaks_[j], v);
}

double DecayProfile::G_between_log(double log_u, double log_r) const {
  if (log_u == -kInf) return kInf;
  if (log_r - log_u > 1.0) return G(std::exp(log_r)) - G(std::exp(log_u));
  return integrate_log(log_u, log_r);
}

double DecayProfile::G_below(double log_r, double gap) const {
  if (!(gap >= 0.0)) throw DomainError("G_below needs gap >= 0");
  if (gap > 1.0) return G_between_log(log_r - gap, log_r);
  // integrate in tau = log r - v so small gaps keep full relative precision
  auto h = [this, log_r](double tau) { return 0.5 / B_(std::exp(log_r - tau)); };
  quad::Options opts;
  opts.abs_tol = 1e-15;
  opts.rel_tol = 1e-13;
  double sum = 0.0;
  double lo = 0.0;
  for (auto it = log_breaks_.rbegin(); it != log_breaks_.rend(); ++it) {
    const double tb = log_r - *it;
    if (tb <= lo) continue;
    if (tb >= gap) break;
    sum += quad::adaptive<double>(h, lo, tb, 0.0, opts).value;
    lo = tb;
  }
  return sum + quad::adaptive<double>(h, lo, gap, 0.0, opts).value;
}

double DecayProfile::G_between(double u, double r) const {
  if (!(u >= 0.0) || !(r >= u)) throw DomainError("G_between needs 0 <= u <= r");
  if (u == 0.0) return kInf;
  return G_between_log(std::log(u), std::log(r));
}

double DecayProfile::G_inverse(double y) const {
  if (std::isnan(y)) throw DomainError("G_inverse of NaN");
  if (y >= g_sup_) return kInf;
  if (y == -kInf) return 0.0;
  return inverse_nondecreasing([this](double x) { return G(x); }, y);
}

bool DecayProfile::diverges_at_zero() const {
  // For s <= 1, B(s) <= B(1), so G(e^v) <= v / (2 B(1)) for v < 0: linear
  // descent in v certifies G(0+) = -inf.
  const double b1 = B_(1.0);
  for (double v : {-10.0, -100.0, -700.0}) {
    if (!(G(std::exp(v)) <= v / (2.0 * b1) * (1.0 - 1e-9))) return false;
  }
  const double v_star = -2.02e6 * b1;
  if (v_star > -700.0 && !(G(std::exp(v_star)) < -1e6)) return false;
  return true;
}

double decay_bound(const DecayProfile& profile, double x0, double t) {
  if (!(x0 > 0.0)) throw DomainError("decay_bound needs x0 > 0");
  if (!(t >= 0.0)) throw DomainError("decay_bound needs t >= 0");
  if (t == 0.0) return x0;
  if (std::isinf(t)) return 0.0;
  return profile.G_inverse(profile.G(x0) - t);
}

// Subordinate bounds --------------------------------------------------------------

std::string NashVariant::label() const {
  switch (kind) {
    case Kind::symmetric:
      return "symmetric";
    case Kind::nonsymmetric:
      return "nonsymmetric";
    case Kind::epsilon:
      return "epsilon(" + format_double(eps) + ")";
    case Kind::epsilon_sup:
      return "epsilon_sup";
  }
  return "?";
}

namespace {

double eps_value(double x, const RateFunction& B, const BernsteinFunction& f, double e) {
  return (1.0 - e) * x * f.eval(e * B(e * x) / (1.0 - e));
}

}  // namespace

EpsilonSup epsilon_sup_bound(double x, const RateFunction& B, const BernsteinFunction& f) {
  // logit-symmetric scan, eps = 1/(1+e^{-z}) for z in [-12, 12]
  const auto zs = linear_grid(-12.0, 12.0, 64);
  auto at = [&](double z) { return eps_value(x, B, f, 1.0 / (1.0 + std::exp(-z))); };
  EpsilonSup best{eps_value(x, B, f, 0.5), 0.5};
  std::size_t bi = zs.size();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double v = at(zs[i]);
    if (v > best.value) {
      best = EpsilonSup{v, 1.0 / (1.0 + std::exp(-zs[i]))};
      bi = i;
    }
  }
  if (bi < zs.size() && std::isfinite(best.value)) {
    const double lo = zs[bi == 0 ? 0 : bi - 1];
    const double hi = zs[std::min(bi + 1, zs.size() - 1)];
    std::uintmax_t iters = 100;
    auto neg = [&](double z) {
      const double v = at(z);
      return std::isnan(v) ? kInf : -v;
    };
    auto [z, val] = boost::math::tools::brent_find_minima(neg, lo, hi, 40, iters);
    if (-val > best.value) best = EpsilonSup{-val, 1.0 / (1.0 + std::exp(-z))};
  }
  return best;
}

double subordinate_nash_bound(double x, const RateFunction& B, const BernsteinFunction& f,
                              NashVariant variant) {
  if (!(x > 0.0)) throw DomainError("subordinate Nash bound needs x > 0");
  switch (variant.kind) {
    case NashVariant::Kind::symmetric:
      return (x / 2.0) * f.eval(B(x / 2.0));
    case NashVariant::Kind::nonsymmetric:
      return (x / 4.0) * f.eval(2.0 * B(x / 2.0));
    case NashVariant::Kind::epsilon:
      if (!(variant.eps > 0.0 && variant.eps < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
      return eps_value(x, B, f, variant.eps);
    case NashVariant::Kind::epsilon_sup:
      return epsilon_sup_bound(x, B, f).value;
  }
  return 0.0;
}

// Verification ---------------------------------------------------------------------

MarginReport verify_nash(const Generator& gen, const RateFunction& B, const std::vector<Vec>& samples,
                         double slack) {
  MarginReport rep;
  rep.check = "nash";
  rep.slack = slack;
  const auto& sp = gen.space();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    const double x = sp.norm2_sq(u);
    const double lhs = gen.energy(u);
    const double rhs = x * B(x);
    rep.rows.push_back(MarginRow{i, x, 0.0, lhs, rhs, lhs - rhs});
  }
  rep.finalize();
  return rep;
}

MarginReport verify_nash(const Generator& gen, const RateFunction& B, const PhiFunctional& phi,
                         const SamplerConfig& cfg) {
  auto rep = verify_nash(gen, B, draw_samples(gen, phi, cfg));
  rep.kernel_excluded = cfg.exclude_kernel;
  if (cfg.exclude_kernel) rep.note = "samples restricted to the sector range(A)";
  return rep;
}

SubordinateEnergy::SubordinateEnergy(const Generator& gen, const BernsteinFunction& f, bool force_phillips)
    : space_(gen.space()) {
  if (gen.symmetric() && !force_phillips) {
    K_ = spectral_apply(gen, f).matrix();
  } else {
    K_ = PhillipsOperator(gen, f).matrix();
    phillips_ = true;
  }
}

MarginReport verify_theorem(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                            const std::vector<Vec>& samples, NashVariant variant, double slack) {
  const auto hyp = verify_nash(gen, B, samples);
  if (!hyp.pass) {
    throw HypothesisError("Nash inequality for A fails on the samples (min margin " +
                          format_double(hyp.min_margin) + ")");
  }
  SubordinateEnergy energy(gen, f);
  MarginReport rep;
  rep.check = "theorem_" + variant.label();
  rep.slack = slack;
  const auto& sp = gen.space();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    const double x = sp.norm2_sq(u);
    const double lhs = energy(u);
    const double rhs = subordinate_nash_bound(x, B, f, variant);
    rep.rows.push_back(MarginRow{i, x, 0.0, lhs, rhs, lhs - rhs});
  }
  rep.note = energy.used_phillips() ? "f(A) by Phillips quadrature" : "f(A) by spectral calculus";
  rep.finalize();
  return rep;
}

MarginReport verify_theorem(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                            const PhiFunctional& phi, NashVariant variant, const SamplerConfig& cfg) {
  auto rep = verify_theorem(gen, f, B, draw_samples(gen, phi, cfg), variant);
  rep.kernel_excluded = cfg.exclude_kernel;
  return rep;
}

DecayEquivalence verify_decay_equivalence(const Generator& gen, const RateFunction& B,
                                          const std::vector<Vec>& samples,
                                          const std::vector<double>& t_grid) {
  const auto hyp = verify_nash(gen, B, samples);
  if (!hyp.pass) throw HypothesisError("Nash inequality for A fails on the samples");
  DecayProfile profile(B);
  const auto& sp = gen.space();
  DecayEquivalence out;
  out.forward.check = "decay_forward";
  out.forward.slack = 1e-8;
  std::size_t id = 0;
  for (double t : t_grid) {
    const Mat T = gen.semigroup(t);
    for (const Vec& u : samples) {
      const double x = sp.norm2_sq(u);
      const double lhs = decay_bound(profile, x, t);
      const double rhs = sp.norm2_sq(T * u);
      out.forward.rows.push_back(MarginRow{id++, x, t, lhs, rhs, lhs - rhs});
    }
  }
  out.forward.finalize();

  const double h = 1e-5;
  out.converse.check = "decay_converse";
  out.converse.slack = 1e-4;
  const Mat Th = gen.semigroup(h);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec& u = samples[i];
    const double x = sp.norm2_sq(u);
    const double lhs = (x - sp.norm2_sq(Th * u)) / (2.0 * h);
    const double rhs = x * B(x);
    out.converse.rows.push_back(MarginRow{i, x, h, lhs, rhs, lhs - rhs});
  }
  out.converse.finalize();
  if (!out.forward.pass) out.converse.note = "premise (decay bound) not verified";
  return out;
}

DecayEquivalence verify_decay_equivalence(const Generator& gen, const RateFunction& B,
                                          const PhiFunctional& phi, const SamplerConfig& cfg,
                                          const std::vector<double>& t_grid) {
  auto out = verify_decay_equivalence(gen, B, draw_samples(gen, phi, cfg), t_grid);
  out.forward.kernel_excluded = out.converse.kernel_excluded = cfg.exclude_kernel;
  return out;
}

// g(r) -----------------------------------------------------------------------------

double g_integral(double r, const DecayProfile& profile, const LevyMeasure& nu) {
  if (!(r > 0.0)) throw DomainError("g_integral needs r > 0");
  switch (nu.kind()) {
    case LevyMeasure::Kind::zero:
      return 0.0;
    case LevyMeasure::Kind::atoms: {
      // nu(2(G(r)-G(u)), inf) = sum of w over atoms with 2(G(r)-G(u)) < s,
      // i.e. u > G^{-1}(G(r) - s/2).
      const double gr = profile.G(r);
      double sum = 0.0;
      for (const auto& [s, w] : nu.points()) {
        sum += w * (r - std::min(r, profile.G_inverse(gr - s / 2.0)));
      }
      return sum;
    }
    case LevyMeasure::Kind::density:
    case LevyMeasure::Kind::tail_only:
      break;
  }
  // w = r - u, integrated from w = 0 (u = r) where the tail argument vanishes
  const double lr = std::log(r);
  auto g = [&](double w) {
    if (w >= r) return 0.0;
    const double arg = 2.0 * profile.G_below(lr, -std::log1p(-w / r));
    return std::isinf(arg) ? 0.0 : nu.tail(arg);
  };
  quad::Options opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-10;
  return quad::from_zero<double>(g, r, 0.0, opts).value;
}

BoundReport check_g_sandwich(const std::vector<double>& r_grid, const DecayProfile& profile,
                             const BernsteinFunction& f, double rel_tol) {
  if (!f.has_triplet() || f.a() != 0.0 || f.b() != 0.0) throw DomainError("g sandwich needs a = b = 0");
  if (f.nu().is_zero()) throw DomainError("g sandwich needs a nonzero Levy measure");
  const double e = std::numbers::e;
  const auto& B = profile.B();
  BoundReport rep;
  rep.check = "g_sandwich";
  for (double r : r_grid) {
    const double lower = (r / 2.0) * f.eval(B(r / 2.0));
    const double upper = e / (e - 1.0) * r * f.eval(B(r));
    rep.add(r, lower, g_integral(r, profile, f.nu()), upper, rel_tol);
  }
  return rep;
}

BoundReport check_mean_value(const DecayProfile& profile,
                             const std::vector<std::pair<double, double>>& pairs, double rel_tol) {
  const auto& B = profile.B();
  BoundReport rep;
  rep.check = "mean_value";
  for (const auto& [u, r] : pairs) {
    if (!(u > 0.0 && r > u)) throw DomainError("mean-value pairs need 0 < u < r");
    const double q = profile.G_between(u, r) / (r - u);
    rep.add(r, 1.0 / (2.0 * r * B(r)), q, 1.0 / (2.0 * u * B(u)), rel_tol);
  }
  return rep;
}

}  // namespace subcal

// Fitting ----------------------------------------------------------------------------

namespace subcal {

std::vector<Vec> sector_vertices(const Generator& gen) {
  const auto n = static_cast<Eigen::Index>(gen.n());
  const Vec& m = gen.space().m();
  const Mat& L = gen.left_kernel();
  std::vector<Vec> out;
  if (L.cols() > 1) return out;
  auto push = [&](Vec u) {
    const double l1 = gen.space().norm1(u);
    if (l1 > 0.0) out.push_back(u / l1);
  };
  if (L.cols() == 0) {
    for (Eigen::Index i = 0; i < n; ++i) push(Vec::Unit(n, i));
    return out;
  }
  const Vec k = L.col(0);
  const double ktol = 1e-14 * k.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(k(i)) <= ktol) {
      push(Vec::Unit(n, i));
      continue;
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(k(j)) <= ktol) continue;
      Vec u = Vec::Zero(n);
      u(i) = m(j) * k(j);
      u(j) = -m(i) * k(i);
      push(u);
    }
  }
  return out;
}

namespace {

// Generalized eigenvectors of the symmetric part (MA + A^T M)/2 in the
// m-metric, projected to the sector.
std::vector<Vec> spectral_candidates(const Generator& gen) {
  const Vec& m = gen.space().m();
  const Mat& A = gen.matrix();
  const Mat H = 0.5 * (m.asDiagonal() * A + A.transpose() * m.asDiagonal());
  const Vec isq = m.cwiseSqrt().cwiseInverse();
  Mat S = isq.asDiagonal() * H * isq.asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  std::vector<Vec> out;
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    Vec v = gen.project_to_sector(isq.asDiagonal() * es.eigenvectors().col(j));
    if (gen.space().norm2(v) > 1e-8) out.push_back(v);
  }
  return out;
}

struct Scored {
  Vec u;
  double x;  // ||u||^2 with Phi(u) = 1
  double q;  // <Au,u> / x
};

}  // namespace

FittedRate fit_B(const Generator& gen, const PhiFunctional& phi, std::vector<double> x_grid,
                 const SamplerConfig& cfg) {
  if (gen.matrix().cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateError("zero generator: the fitted Nash rate would vanish");
  }
  if (gen.left_kernel().cols() == static_cast<Eigen::Index>(gen.n())) {
    throw DegenerateError("sector range(A) is trivial");
  }
  const auto& sp = gen.space();
  FittedRate fit{RateFunction::constant(1.0, RateFunction::Direction::increasing), {}, {}, {}, 0.0, false, 0.0};

  auto score = [&](const Vec& u) {
    const double x = sp.norm2_sq(u);
    return Scored{u, x, gen.energy(u) / x};
  };
  auto project = [&](const Vec& u) { return gen.project_to_sector(u); };

  SamplerConfig c = cfg;
  c.exclude_kernel = true;
  std::vector<Scored> pool;
  for (auto& u : draw_samples(gen, phi, c)) pool.push_back(score(u));
  for (auto& u : spectral_candidates(gen)) pool.push_back(score(phi.normalize(u)));
  std::vector<Vec> vertices;
  if (phi.is_l1_squared()) vertices = sector_vertices(gen);
  for (auto& u : vertices) pool.push_back(score(phi.normalize(u)));

  if (!vertices.empty()) {
    fit.x_sup_exact = true;
    for (const auto& v : vertices) fit.x_sup = std::max(fit.x_sup, sp.norm2_sq(phi.normalize(v)));
  } else {
    // estimate by maximising the ratio from the best few pool members
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool[a].x > pool[b].x; });
    for (std::size_t k = 0; k < std::min<std::size_t>(4, order.size()); ++k) {
      auto res = local_search(pool[order[k]].u, [&](const Vec& u) { return sp.norm2_sq(u); }, project, phi);
      pool.push_back(score(res.u));
    }
    for (const auto& s : pool) fit.x_sup = std::max(fit.x_sup, s.x);
    fit.warnings.push_back("x_sup estimated by search: " + format_double(fit.x_sup));
  }

  double x_min = kInf;
  for (const auto& s : pool) x_min = std::min(x_min, s.x);
  if (x_grid.empty()) {
    if (fit.x_sup <= x_min * (1.0 + 1e-9)) {
      x_grid = {fit.x_sup};
    } else {
      x_grid = log_grid(x_min, fit.x_sup, 24);
    }
  }
  std::sort(x_grid.begin(), x_grid.end());
  x_grid.erase(std::unique(x_grid.begin(), x_grid.end()), x_grid.end());

  std::vector<double> kept;
  for (double x : x_grid) {
    if (!(x > 0.0)) throw DomainError("Nash grid points must be positive");
    if (x > fit.x_sup * (1.0 + 1e-12)) {
      fit.warnings.push_back("grid point " + format_double(x) + " above sup ||u||^2 = " +
                             format_double(fit.x_sup) + " dropped");
      continue;
    }
    kept.push_back(x);
  }
  if (kept.empty()) throw DomainError("no feasible Nash grid points");

  // Refine each constrained infimum by local search from the best members.
  auto best_from = [&](double xk, std::size_t count) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].x >= xk) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pool[a].q < pool[b].q; });
    if (idx.size() > count) idx.resize(count);
    return idx;
  };
  for (double xk : kept) {
    auto obj = [&](const Vec& u) {
      const double x = sp.norm2_sq(u);
      return x >= xk ? -gen.energy(u) / x : -kInf;
    };
    for (std::size_t i : best_from(xk, 3)) {
      auto res = local_search(pool[i].u, obj, project, phi);
      pool.push_back(score(res.u));
    }
  }
  {
    auto obj = [&](const Vec& u) { return -gen.energy(u) / sp.norm2_sq(u); };
    for (std::size_t i : best_from(0.0, 3)) {
      auto res = local_search(pool[i].u, obj, project, phi);
      pool.push_back(score(res.u));
    }
  }

  std::vector<double> vals;
  for (double xk : kept) {
    double v = kInf;
    for (const auto& s : pool) {
      if (s.x >= xk) v = std::min(v, s.q);
    }
    vals.push_back(v);
  }
  fit.raw = vals;
  // increasing envelope: running minimum from the right
  for (std::size_t k = vals.size() - 1; k-- > 0;) vals[k] = std::min(vals[k], vals[k + 1]);
  double floor = kInf;
  for (const auto& s : pool) floor = std::min(floor, s.q);
  floor = std::min(floor, vals.front());
  if (!(floor > 0.0)) throw DegenerateError("fitted Nash rate is not positive on the sector");
  fit.floor = floor;
  fit.grid = kept;

  const double xs = fit.x_sup;
  const double top = vals.back();
  auto left = [floor](double) { return floor; };
  auto right = [xs, top](double x) { return x <= xs ? top : top * (x / xs); };
  fit.rate = RateFunction::step(RateFunction::Direction::increasing, kept, vals, left, right, {xs}, floor,
                                kInf, "fitted B");
  return fit;
}

}  // namespace subcal
