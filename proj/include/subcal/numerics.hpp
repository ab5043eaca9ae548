#pragma once

// Scalar and matrix-valued quadrature, monotone inversion, grid searches and
// float formatting shared by every module.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subcal/errors.hpp"

namespace subcal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_evaluations = 400000;
};

template <class T>
struct Estimate {
  T value;
  double error = 0.0;
  std::size_t evaluations = 0;
};

inline double magnitude(double x) { return std::abs(x); }

template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// Kronrod 15 with the embedded Gauss 7 rule; the Gauss nodes are the
// even-indexed Kronrod abscissae.
template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T kronrod = wk[0] * fc;
  T gauss = wg[0] * fc;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    T s = f(c - h * xk[i]);
    s += f(c + h * xk[i]);
    kronrod += wk[i] * s;
    if (i % 2 == 0) gauss += wg[i / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
  const double err = magnitude(T(kronrod - gauss));
  return Panel<T>{a, b, kronrod, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod on [a, b]. `zero` fixes the shape of the
/// value type (a scalar or a sized Eigen matrix).
template <class T, class F>
Estimate<T> adaptive(F&& f, double a, double b, const T& zero, const Options& opts = {}) {
  if (a == b) return Estimate<T>{zero, 0.0, 0};
  std::priority_queue<detail::Panel<T>> heap;
  std::vector<detail::Panel<T>> frozen;
  auto first = detail::gk15<T>(f, a, b);
  std::size_t evals = 15;
  T total = first.value;
  double total_err = first.error;
  heap.push(std::move(first));
  while (!heap.empty()) {
    const double tol = std::max(opts.abs_tol, opts.rel_tol * magnitude(total));
    if (total_err <= tol) break;
    if (evals + 30 > opts.max_evaluations) {
      throw QuadratureError("adaptive quadrature exceeded evaluation budget",
                            magnitude(total), total_err);
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Cannot bisect further in double precision.
      frozen.push_back(std::move(worst));
      if (heap.empty()) break;
      continue;
    }
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    evals += 30;
    total += left.value;
    total += right.value;
    total -= worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  T sum = zero;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  for (const auto& p : frozen) {
    sum += p.value;
    err += p.error;
  }
  return Estimate<T>{sum, err, evals};
}

/// Sum of adaptive integrals over consecutive breakpoints.
template <class T, class F>
Estimate<T> adaptive_split(F&& f, std::span<const double> points, const T& zero,
                           const Options& opts = {}) {
  Estimate<T> out{zero, 0.0, 0};
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    auto piece = adaptive<T>(f, points[i], points[i + 1], zero, opts);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
  }
  return out;
}

namespace detail {

// Integrate h over [0, inf) in doubling panels [0,1], [1,2], [2,4], ...
// A panel ends the sweep once the integrand decays geometrically across it
// (two consistent log-slopes p > 0) and the extrapolated remainder h(hi)/p is
// negligible; the remainder is then added. Two consecutive negligible panels
// also end it. `v_max` bounds the search.
template <class T, class H>
Estimate<T> doubling_panels(H& h, double v_max, const T& zero, const Options& opts,
                            const char* what) {
  Estimate<T> out{zero, 0.0, 0};
  double lo = 0.0;
  double width = 1.0;
  int quiet = 0;
  Options panel_opts = opts;
  panel_opts.abs_tol = std::max(opts.abs_tol * 1e-2, 1e-300);
  while (true) {
    double hi = std::min(lo + width, v_max);
    auto piece = adaptive<T>(h, lo, hi, zero, panel_opts);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
    const double scale = magnitude(out.value);
    if (!std::isfinite(scale)) {
      throw QuadratureError(std::string(what) + ": non-finite integrand", scale, out.error);
    }
    const double negligible = std::max(opts.abs_tol * 1e-3, opts.rel_tol * 1e-3 * scale);
    // quiet panels only end the sweep once something has accumulated: an
    // integrand can be negligible near the start and large further out
    quiet = scale > 0.0 && magnitude(piece.value) <= negligible ? quiet + 1 : 0;
    if (quiet >= 2) return out;
    if (lo >= 1.0) {
      const double mid = 0.5 * (lo + hi);
      T h_hi = h(hi);
      const double a0 = magnitude(h(lo));
      const double a1 = magnitude(h(mid));
      const double a2 = magnitude(h_hi);
      out.evaluations += 3;
      if (a0 > 0.0 && a1 > 0.0 && a2 > 0.0) {
        const double p1 = std::log(a0 / a1) / (mid - lo);
        const double p2 = std::log(a1 / a2) / (hi - mid);
        if (p1 > 0.0 && p2 > 0.0 && std::abs(p1 - p2) <= 0.1 * std::max(p1, p2) &&
            a2 / p2 <= negligible) {
          h_hi *= 1.0 / p2;
          out.value += h_hi;
          out.error += a2 / p2 * std::abs(p1 - p2) / p2;
          return out;
        }
      } else if (a2 == 0.0 && a1 == 0.0 && magnitude(piece.value) <= negligible) {
        return out;
      }
    }
    if (hi >= v_max) {
      if (scale == 0.0) return out;  // identically zero up to the range limit
      throw QuadratureError(std::string(what) + ": improper integral did not converge",
                            scale, out.error + magnitude(piece.value));
    }
    if (out.evaluations > opts.max_evaluations) {
      throw QuadratureError(std::string(what) + ": evaluation budget exceeded", scale,
                            out.error);
    }
    lo = hi;
    if (lo >= 1.0) width = lo;
  }
}

}  // namespace detail

/// Integral of g over (0, c] by the substitution t = c e^{-v}; g may have an
/// integrable singularity at 0.
template <class T, class G>
Estimate<T> from_zero(G&& g, double c, const T& zero, const Options& opts = {}) {
  auto h = [&](double v) -> T {
    const double t = c * std::exp(-v);
    T val = g(t);
    val *= t;
    return val;
  };
  const double v_max = std::log(c) + 690.0;
  return detail::doubling_panels<T>(h, v_max, zero, opts, "integral from zero");
}

/// Integral of g over [c, inf) by the substitution t = c e^{v}.
template <class T, class G>
Estimate<T> to_infinity(G&& g, double c, const T& zero, const Options& opts = {}) {
  auto h = [&](double v) -> T {
    const double t = c * std::exp(v);
    T val = g(t);
    val *= t;
    return val;
  };
  const double v_max = 690.0 - std::log(c);
  return detail::doubling_panels<T>(h, v_max, zero, opts, "integral to infinity");
}

/// Integral of g over (0, inf), split at c.
template <class T, class G>
Estimate<T> half_line(G&& g, double c, const T& zero, const Options& opts = {}) {
  auto lower = from_zero<T>(g, c, zero, opts);
  auto upper = to_infinity<T>(g, c, zero, opts);
  lower.value += upper.value;
  lower.error += upper.error;
  lower.evaluations += upper.evaluations;
  return lower;
}

inline double scalar_from_zero(const std::function<double(double)>& g, double c,
                               const Options& opts = {}) {
  return from_zero<double>(g, c, 0.0, opts).value;
}

inline double scalar_to_infinity(const std::function<double(double)>& g, double c,
                                 const Options& opts = {}) {
  return to_infinity<double>(g, c, 0.0, opts).value;
}

}  // namespace quad

// Monotone inversion ---------------------------------------------------------

/// Generalized inverse inf{x > 0 : h(x) >= y} of a nondecreasing h on (0, inf).
/// Returns 0 when h(0+) >= y and +inf when h never reaches y.
double inverse_nondecreasing(const std::function<double(double)>& h, double y);

/// Generalized inverse inf{x > 0 : h(x) <= y} of a nonincreasing h on (0, inf).
double inverse_nonincreasing(const std::function<double(double)>& h, double y);

// Grids and sup searches -----------------------------------------------------

std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct GridMax {
  double arg = 0.0;
  double value = -kInf;
  std::size_t index = 0;
};

/// Maximises obj on a sorted positive grid (ties resolve to the smallest
/// index), then refines with Brent's method in log coordinates between the
/// neighbours of the best node. The returned value is never below the best
/// grid value.
GridMax maximize_on_grid(std::span<const double> grid, const std::function<double(double)>& obj,
                         bool refine = true, int bits = 40);

// Formatting -------------------------------------------------------------------

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

double median(std::vector<double> values);

}  // namespace subcal
