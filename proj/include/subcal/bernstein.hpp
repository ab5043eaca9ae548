#pragma once

// Bernstein functions f(l) = a + b l + int (1 - e^{-t l}) nu(dt) and their
// Levy measures.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subcal/numerics.hpp"
#include "subcal/report.hpp"

namespace subcal {

class LevyMeasure {
public:
  enum class Kind { zero, atoms, density, tail_only };
  using Fn = std::function<double(double)>;

  static LevyMeasure zero();
  /// Finite sum of point masses (location, mass); both must be positive.
  static LevyMeasure atoms(std::vector<std::pair<double, double>> points);
  /// Density with optional closed-form tail. `singularity_order` is p in
  /// density ~ t^{-p} at 0 (p < 2 is required for integrability).
  static LevyMeasure density(Fn density, double singularity_order, Fn tail = {},
                             double total_mass = kInf);
  /// Measure given only through its tail s -> nu(s, inf).
  static LevyMeasure tail_only(Fn tail, double total_mass = kInf);

  Kind kind() const { return kind_; }
  bool is_zero() const;
  const std::vector<std::pair<double, double>>& points() const { return atoms_; }
  double singularity_order() const { return singularity_; }

  /// nu(s, inf) for s > 0.
  double tail(double s) const;
  /// nu_1(x) = int_0^x nu(s, inf) ds.
  double nu1(double x) const;
  /// nu(0, inf), possibly infinite.
  double total_mass() const { return mass_; }
  /// int (1 - e^{-t l}) nu(dt).
  double laplace_part(double lambda) const;
  /// int (1 ^ t) nu(dt), which must be finite.
  double triplet_integral() const { return nu1(1.0); }

  /// Density value (density kind only).
  double density_at(double t) const { return density_(t); }
  bool has_density() const { return static_cast<bool>(density_); }
  bool has_tail() const { return static_cast<bool>(tail_); }

private:
  Kind kind_ = Kind::zero;
  std::vector<std::pair<double, double>> atoms_;
  Fn density_;
  Fn tail_;
  double singularity_ = 0.0;
  double mass_ = 0.0;

  void validate() const;
};

class BernsteinFunction {
public:
  using Fn = std::function<double(double)>;

  BernsteinFunction(double a, double b, LevyMeasure nu);

  static BernsteinFunction stable(double alpha);
  static BernsteinFunction log1p();
  static BernsteinFunction rational();  // l / (1 + l)
  static BernsteinFunction one_minus_exp();
  static BernsteinFunction identity();
  /// Arbitrary closed form with no triplet; for negative controls and tests.
  /// `sup` is the value at infinity.
  static BernsteinFunction unchecked(Fn f, std::string name, double sup = kInf);

  double a() const { return a_; }
  double b() const { return b_; }
  const LevyMeasure& nu() const { return nu_; }
  const std::string& family() const { return family_; }
  double parameter() const { return parameter_; }
  bool has_closed_form() const { return static_cast<bool>(closed_); }
  bool has_triplet() const { return has_triplet_; }

  /// f(l); l = inf returns sup f. Uses the closed form when present.
  double eval(double lambda) const;
  /// a + b l + Levy integral, ignoring any closed form.
  double eval_quadrature(double lambda) const;
  double operator()(double lambda) const { return eval(lambda); }

  /// Generalized inverse. y <= a gives 0; y within 1e-12 of sup f gives inf;
  /// y above that throws RangeError.
  double inverse(double y) const;
  double sup() const;
  bool degenerate() const;

  BernsteinFunction with_closed_form(Fn f, Fn inverse, std::string family, double parameter) const;

private:
  double a_ = 0.0;
  double b_ = 0.0;
  LevyMeasure nu_ = LevyMeasure::zero();
  Fn closed_;
  Fn closed_inverse_;
  std::string family_ = "triplet";
  double parameter_ = 0.0;
  bool has_triplet_ = true;
  double sup_override_ = -1.0;
};

/// ((e-1)/e) x nu_1(1/x) <= f(x) <= x nu_1(1/x); requires a = b = 0, nu != 0.
BoundReport check_okura_bounds(const BernsteinFunction& f, const std::vector<double>& x_grid,
                               double rel_tol = 1e-8);

/// f(2x)/2 <= f(x) (1 + 1e-12) at each grid point; reported as
/// lower = f(2x)/2, value = f(x).
BoundReport check_subadditivity(const BernsteinFunction& f, const std::vector<double>& x_grid);

/// Quadrature of int e^{-s l} mu_t(ds) for the 1/2-stable subordinator against
/// e^{-t sqrt(l)}.
BoundReport subordinator_laplace_check(const BernsteinFunction& f, double t,
                                       const std::vector<double>& lambda_grid,
                                       double rel_tol = 1e-8);

/// Closed form against quadrature (lower = upper = closed form).
BoundReport closed_form_agreement(const BernsteinFunction& f, const std::vector<double>& grid,
                                  double rel_tol = 1e-8);

/// Monotonicity and concavity on consecutive grid triples.
BoundReport check_shape(const BernsteinFunction& f, const std::vector<double>& grid,
                        double tol = 1e-9);

}  // namespace subcal
