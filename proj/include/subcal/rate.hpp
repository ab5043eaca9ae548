#pragma once

#include <functional>
#include <string>
#include <vector>

#include "subcal/numerics.hpp"

namespace subcal {

/// Monotone scalar function on (0, inf): B (increasing) or beta, alpha
/// (decreasing). Values at 0 and inf are the declared limits, which may be
/// infinite.
class RateFunction {
public:
  enum class Direction { increasing, decreasing };
  using Fn = std::function<double(double)>;

  RateFunction(Direction dir, Fn fn, std::string name = "rate");
  RateFunction(Direction dir, Fn fn, std::string name, double at_zero, double at_inf);

  /// c x^p: increasing for p > 0, decreasing for p < 0; closed-form inverse.
  static RateFunction power(double c, double p, std::string name = "");
  /// Constant c with a declared direction.
  static RateFunction constant(double c, Direction dir);

  /// Right-continuous step function with values[k] on [knots[k], knots[k+1]);
  /// `left` covers (0, knots[0]) and `right` covers [knots.back(), inf).
  /// `extra_breaks` lists points where `left`/`right` change form.
  static RateFunction step(Direction dir, std::vector<double> knots, std::vector<double> values,
                           Fn left, Fn right, std::vector<double> extra_breaks, double at_zero,
                           double at_inf, std::string name);

  double operator()(double x) const;
  Direction direction() const { return dir_; }
  bool increasing() const { return dir_ == Direction::increasing; }
  const std::string& name() const { return name_; }

  /// Points where the function may jump or change form (sorted).
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  /// Generalized inverse: inf{x : B(x) >= y} (increasing) or
  /// inf{x : beta(x) <= y} (decreasing).
  double inverse(double y) const;

  RateFunction scaled(double c) const;

  /// Monotonicity on the grid with the given relative slack.
  bool check_monotone(const std::vector<double>& grid, double slack = 1e-12) const;

private:
  Direction dir_;
  Fn fn_;
  Fn inverse_;
  std::string name_;
  double at_zero_;
  double at_inf_;
  std::vector<double> breaks_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace subcal
