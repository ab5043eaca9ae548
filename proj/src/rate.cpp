#include "subcal/rate.hpp"

#include <algorithm>
#include <cmath>

namespace subcal {

RateFunction::RateFunction(Direction dir, Fn fn, std::string name)
    : RateFunction(dir, std::move(fn), std::move(name), dir == Direction::increasing ? 0.0 : kInf,
                   dir == Direction::increasing ? kInf : 0.0) {}

RateFunction::RateFunction(Direction dir, Fn fn, std::string name, double at_zero, double at_inf)
    : dir_(dir), fn_(std::move(fn)), name_(std::move(name)), at_zero_(at_zero), at_inf_(at_inf) {
  if (!fn_) throw DomainError("rate function callable is empty");
}

RateFunction RateFunction::power(double c, double p, std::string name) {
  if (!(c > 0.0) || p == 0.0) throw DomainError("power rate needs c > 0 and p != 0");
  const Direction dir = p > 0 ? Direction::increasing : Direction::decreasing;
  if (name.empty()) name = format_double(c) + "*x^" + format_double(p);
  RateFunction r(dir, [c, p](double x) { return c * std::pow(x, p); }, std::move(name));
  r.inverse_ = [c, p](double y) { return std::pow(y / c, 1.0 / p); };
  return r;
}

RateFunction RateFunction::constant(double c, Direction dir) {
  return RateFunction(dir, [c](double) { return c; }, "const " + format_double(c), c, c);
}

RateFunction RateFunction::step(Direction dir, std::vector<double> knots, std::vector<double> values,
                                Fn left, Fn right, std::vector<double> extra_breaks,
                                double at_zero, double at_inf, std::string name) {
  if (knots.empty() || knots.size() != values.size()) {
    throw DomainError("step rate needs matching nonempty knots and values");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw DomainError("step knots must increase");
  }
  auto k = knots;
  auto v = values;
  Fn fn = [k, v, left, right](double x) {
    if (x < k.front()) return left(x);
    if (x >= k.back()) return right(x);
    const auto it = std::upper_bound(k.begin(), k.end(), x);
    return v[static_cast<std::size_t>(it - k.begin()) - 1];
  };
  RateFunction r(dir, std::move(fn), std::move(name), at_zero, at_inf);
  r.breaks_ = knots;
  r.breaks_.insert(r.breaks_.end(), extra_breaks.begin(), extra_breaks.end());
  std::sort(r.breaks_.begin(), r.breaks_.end());
  r.breaks_.erase(std::unique(r.breaks_.begin(), r.breaks_.end()), r.breaks_.end());
  r.knots_ = std::move(knots);
  r.values_ = std::move(values);
  return r;
}

double RateFunction::operator()(double x) const {
  if (std::isnan(x) || x < 0.0) throw DomainError("rate functions are defined on [0, inf]");
  if (x == 0.0) return at_zero_;
  if (std::isinf(x)) return at_inf_;
  return fn_(x);
}

double RateFunction::inverse(double y) const {
  if (inverse_) return inverse_(y);
  if (increasing()) return inverse_nondecreasing([this](double x) { return (*this)(x); }, y);
  return inverse_nonincreasing([this](double x) { return (*this)(x); }, y);
}

RateFunction RateFunction::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("rate scale must be positive");
  auto fn = fn_;
  RateFunction out(dir_, [fn, c](double x) { return c * fn(x); }, format_double(c) + "*" + name_,
                   c * at_zero_, c * at_inf_);
  if (inverse_) {
    auto inv = inverse_;
    out.inverse_ = [inv, c](double y) { return inv(y / c); };
  }
  out.breaks_ = breaks_;
  out.knots_ = knots_;
  out.values_ = values_;
  for (auto& v : out.values_) v *= c;
  return out;
}

bool RateFunction::check_monotone(const std::vector<double>& grid, double slack) const {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = (*this)(grid[i - 1]);
    const double b = (*this)(grid[i]);
    const double tol = slack * std::max(std::abs(a), std::abs(b));
    if (increasing() ? b < a - tol : b > a + tol) return false;
  }
  return true;
}

}  // namespace subcal
