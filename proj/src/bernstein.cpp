#include "subcal/bernstein.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace subcal {

namespace {

const double kOneMinusInvE = -std::expm1(-1.0);

}  // namespace

// LevyMeasure ----------------------------------------------------------------

LevyMeasure LevyMeasure::zero() { return LevyMeasure{}; }

LevyMeasure LevyMeasure::atoms(std::vector<std::pair<double, double>> points) {
  LevyMeasure m;
  m.kind_ = Kind::atoms;
  m.mass_ = 0.0;
  for (const auto& [s, w] : points) {
    if (!(s > 0.0) || !std::isfinite(s) || !(w > 0.0) || !std::isfinite(w)) {
      throw DomainError("atom locations and masses must be positive and finite");
    }
    m.mass_ += w;
  }
  std::sort(points.begin(), points.end());
  m.atoms_ = std::move(points);
  if (m.atoms_.empty()) m.kind_ = Kind::zero;
  return m;
}

LevyMeasure LevyMeasure::density(Fn density, double singularity_order, Fn tail,
                                 double total_mass) {
  if (!density) throw DomainError("density callable is empty");
  if (!(singularity_order < 2.0)) {
    throw DomainError("density singularity t^-p needs p < 2 for int (1 ^ t) nu(dt) < inf");
  }
  LevyMeasure m;
  m.kind_ = Kind::density;
  m.density_ = std::move(density);
  m.tail_ = std::move(tail);
  m.singularity_ = singularity_order;
  m.mass_ = total_mass;
  m.validate();
  return m;
}

LevyMeasure LevyMeasure::tail_only(Fn tail, double total_mass) {
  if (!tail) throw DomainError("tail callable is empty");
  LevyMeasure m;
  m.kind_ = Kind::tail_only;
  m.tail_ = std::move(tail);
  m.mass_ = total_mass;
  m.validate();
  return m;
}

void LevyMeasure::validate() const {
  // Tail must be nonnegative and nonincreasing on a probe grid, and the
  // triplet integral must come out finite.
  const auto probe = log_grid(1e-6, 1e6, 25);
  double prev = kInf;
  for (double s : probe) {
    const double v = tail(s);
    if (!(v >= 0.0) || v > prev * (1.0 + 1e-12) + 1e-300) {
      throw DomainError("Levy tail must be nonnegative and nonincreasing");
    }
    prev = v;
  }
  double ti = 0.0;
  try {
    ti = triplet_integral();
  } catch (const QuadratureError& e) {
    throw DomainError(std::string("int (1 ^ t) nu(dt) does not converge: ") + e.what());
  }
  if (!std::isfinite(ti)) throw DomainError("int (1 ^ t) nu(dt) is not finite");
}

bool LevyMeasure::is_zero() const {
  return kind_ == Kind::zero || (kind_ == Kind::atoms && atoms_.empty());
}

double LevyMeasure::tail(double s) const {
  if (!(s >= 0.0)) throw DomainError("tail argument must be nonnegative");
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::atoms: {
      double sum = 0.0;
      for (const auto& [loc, w] : atoms_) {
        if (loc > s) sum += w;
      }
      return sum;
    }
    case Kind::density:
      if (tail_) return s == 0.0 ? mass_ : tail_(s);
      if (s == 0.0) return mass_;
      return quad::to_infinity<double>(density_, s, 0.0).value;
    case Kind::tail_only:
      return s == 0.0 ? mass_ : tail_(s);
  }
  return 0.0;
}

double LevyMeasure::nu1(double x) const {
  if (!(x > 0.0)) throw DomainError("nu1 needs x > 0");
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::atoms: {
      double sum = 0.0;
      for (const auto& [loc, w] : atoms_) sum += w * std::min(loc, x);
      return sum;
    }
    case Kind::density:
      if (!tail_) {
        // int min(t, x) nu(dt)
        auto g = [this](double t) { return t * density_(t); };
        const double c = std::min(x, 1.0);
        double sum = quad::from_zero<double>(g, c, 0.0).value + x * tail(x);
        if (x > c) sum += quad::adaptive<double>(g, c, x, 0.0).value;
        return sum;
      }
      [[fallthrough]];
    case Kind::tail_only: {
      auto g = [this](double s) { return tail_(s); };
      const double c = std::min(x, 1.0);
      double sum = quad::from_zero<double>(g, c, 0.0).value;
      if (x > c) {
        auto in_log = [this](double v) { return std::exp(v) * tail_(std::exp(v)); };
        sum += quad::adaptive<double>(in_log, 0.0, std::log(x), 0.0).value;
      }
      return sum;
    }
  }
  return 0.0;
}

double LevyMeasure::laplace_part(double lambda) const {
  if (lambda == 0.0) return 0.0;
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::atoms: {
      double sum = 0.0;
      for (const auto& [loc, w] : atoms_) sum += w * -std::expm1(-loc * lambda);
      return sum;
    }
    case Kind::density: {
      auto g = [this, lambda](double t) { return -std::expm1(-t * lambda) * density_(t); };
      return quad::from_zero<double>(g, 1.0, 0.0).value + quad::to_infinity<double>(g, 1.0, 0.0).value;
    }
    case Kind::tail_only: {
      // Integration by parts: lambda int e^{-t lambda} nu(t, inf) dt.
      auto g = [this, lambda](double t) { return std::exp(-t * lambda) * tail_(t); };
      return lambda * (quad::from_zero<double>(g, 1.0, 0.0).value +
                       quad::to_infinity<double>(g, 1.0, 0.0).value);
    }
  }
  return 0.0;
}

// BernsteinFunction --------------------------------------------------------------

BernsteinFunction::BernsteinFunction(double a, double b, LevyMeasure nu)
    : a_(a), b_(b), nu_(std::move(nu)) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("Bernstein triplet needs finite a >= 0 and b >= 0");
  }
}

BernsteinFunction BernsteinFunction::with_closed_form(Fn f, Fn inverse, std::string family,
                                                      double parameter) const {
  BernsteinFunction out = *this;
  out.closed_ = std::move(f);
  out.closed_inverse_ = std::move(inverse);
  out.family_ = std::move(family);
  out.parameter_ = parameter;
  return out;
}

BernsteinFunction BernsteinFunction::stable(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("stable family needs 0 < alpha <= 1");
  auto f = [alpha](double l) { return std::pow(l, alpha); };
  auto inv = [alpha](double y) { return std::pow(y, 1.0 / alpha); };
  if (alpha == 1.0) {
    return BernsteinFunction(0.0, 1.0, LevyMeasure::zero()).with_closed_form(f, inv, "stable", 1.0);
  }
  const double c = alpha / std::tgamma(1.0 - alpha);
  const double ct = 1.0 / std::tgamma(1.0 - alpha);
  auto nu = LevyMeasure::density([alpha, c](double t) { return c * std::pow(t, -1.0 - alpha); },
                                 1.0 + alpha,
                                 [alpha, ct](double s) { return ct * std::pow(s, -alpha); });
  return BernsteinFunction(0.0, 0.0, std::move(nu)).with_closed_form(f, inv, "stable", alpha);
}

BernsteinFunction BernsteinFunction::log1p() {
  auto nu = LevyMeasure::density([](double t) { return std::exp(-t) / t; }, 1.0,
                                 [](double s) { return boost::math::expint(1, s); });
  return BernsteinFunction(0.0, 0.0, std::move(nu))
      .with_closed_form([](double l) { return std::log1p(l); },
                        [](double y) { return std::expm1(y); }, "log1p", 0.0);
}

BernsteinFunction BernsteinFunction::rational() {
  auto nu = LevyMeasure::density([](double t) { return std::exp(-t); }, 0.0,
                                 [](double s) { return std::exp(-s); }, 1.0);
  return BernsteinFunction(0.0, 0.0, std::move(nu))
      .with_closed_form([](double l) { return l / (1.0 + l); },
                        [](double y) { return y / (1.0 - y); }, "rational", 0.0);
}

BernsteinFunction BernsteinFunction::one_minus_exp() {
  return BernsteinFunction(0.0, 0.0, LevyMeasure::atoms({{1.0, 1.0}}))
      .with_closed_form([](double l) { return -std::expm1(-l); },
                        [](double y) { return -std::log1p(-y); }, "one_minus_exp", 0.0);
}

BernsteinFunction BernsteinFunction::identity() {
  return BernsteinFunction(0.0, 1.0, LevyMeasure::zero())
      .with_closed_form([](double l) { return l; }, [](double y) { return y; }, "identity", 0.0);
}

BernsteinFunction BernsteinFunction::unchecked(Fn f, std::string name, double sup) {
  BernsteinFunction out(0.0, 0.0, LevyMeasure::zero());
  out.closed_ = std::move(f);
  out.family_ = std::move(name);
  out.has_triplet_ = false;
  out.sup_override_ = sup;
  return out;
}

bool BernsteinFunction::degenerate() const {
  if (!has_triplet_) return false;
  return b_ == 0.0 && nu_.is_zero();
}

double BernsteinFunction::sup() const {
  if (!has_triplet_) return sup_override_;
  if (b_ > 0.0) return kInf;
  return a_ + nu_.total_mass();
}

double BernsteinFunction::eval_quadrature(double lambda) const {
  if (!(lambda >= 0.0)) throw DomainError("Bernstein functions are evaluated at lambda >= 0");
  if (!has_triplet_) throw DomainError("function has no Levy triplet");
  if (std::isinf(lambda)) return sup();
  return a_ + b_ * lambda + nu_.laplace_part(lambda);
}

double BernsteinFunction::eval(double lambda) const {
  if (!(lambda >= 0.0)) throw DomainError("Bernstein functions are evaluated at lambda >= 0");
  if (std::isinf(lambda)) return sup();
  if (closed_) return closed_(lambda);
  return eval_quadrature(lambda);
}

double BernsteinFunction::inverse(double y) const {
  if (!(y >= 0.0)) throw DomainError("inverse needs y >= 0");
  if (degenerate()) throw DegenerateError("inverse of a constant Bernstein function");
  if (has_triplet_ && y <= a_) return 0.0;
  const double s = sup();
  if (std::isfinite(s)) {
    const double band = 1e-12 * std::max(1.0, s);
    if (y > s + band) throw RangeError("value " + format_double(y) + " exceeds sup f = " + format_double(s));
    if (y >= s - band) return kInf;
  }
  if (std::isinf(y)) return kInf;
  if (closed_inverse_) return closed_inverse_(y);
  return inverse_nondecreasing([this](double l) { return eval(l); }, y);
}

// Checks ------------------------------------------------------------------------

BoundReport check_okura_bounds(const BernsteinFunction& f, const std::vector<double>& x_grid,
                               double rel_tol) {
  if (!f.has_triplet() || f.a() != 0.0 || f.b() != 0.0) {
    throw DomainError("integrated-tail bounds need a = b = 0");
  }
  if (f.nu().is_zero()) throw DomainError("integrated-tail bounds need a nonzero Levy measure");
  BoundReport rep;
  rep.check = "okura";
  for (double x : x_grid) {
    const double upper = x * f.nu().nu1(1.0 / x);
    rep.add(x, kOneMinusInvE * upper, f.eval(x), upper, rel_tol);
  }
  return rep;
}

BoundReport check_subadditivity(const BernsteinFunction& f, const std::vector<double>& x_grid) {
  BoundReport rep;
  rep.check = "subadditivity";
  for (double x : x_grid) {
    rep.add(x, 0.5 * f.eval(2.0 * x), f.eval(x), kInf, 1e-12);
  }
  return rep;
}

BoundReport subordinator_laplace_check(const BernsteinFunction& f, double t,
                                       const std::vector<double>& lambda_grid, double rel_tol) {
  if (f.family() != "stable" || f.parameter() != 0.5) {
    throw DomainError("subordinator density is known in closed form only for alpha = 1/2");
  }
  if (!(t > 0.0)) throw DomainError("subordinator time must be positive");
  BoundReport rep;
  rep.check = "subordinator_laplace";
  const double norm = t / (2.0 * std::sqrt(std::numbers::pi));
  for (double lambda : lambda_grid) {
    auto mu = [&](double s) {
      return std::exp(-s * lambda - t * t / (4.0 * s)) * norm * std::pow(s, -1.5);
    };
    const double c = std::max(t * t / 6.0, 1e-8);
    const double q = quad::half_line<double>(mu, c, 0.0).value;
    const double exact = std::exp(-t * f.eval(lambda));
    rep.add(lambda, exact, q, exact, rel_tol);
  }
  return rep;
}

BoundReport closed_form_agreement(const BernsteinFunction& f, const std::vector<double>& grid,
                                  double rel_tol) {
  BoundReport rep;
  rep.check = "closed_form";
  for (double x : grid) {
    const double exact = f.eval(x);
    rep.add(x, exact, f.eval_quadrature(x), exact, rel_tol);
  }
  return rep;
}

BoundReport check_shape(const BernsteinFunction& f, const std::vector<double>& grid, double tol) {
  BoundReport rep;
  rep.check = "shape";
  rep.note = "rows alternate: (f(x0) <= f(x1)) then (right slope <= left slope)";
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double f0 = f.eval(grid[i - 1]);
    const double f1 = f.eval(grid[i]);
    rep.add(grid[i], f0, f1, kInf, tol);
    if (i + 1 < grid.size()) {
      const double f2 = f.eval(grid[i + 1]);
      const double left = (f1 - f0) / (grid[i] - grid[i - 1]);
      const double right = (f2 - f1) / (grid[i + 1] - grid[i]);
      rep.add(grid[i], right, left, kInf, tol);
    }
  }
  return rep;
}

}  // namespace subcal
