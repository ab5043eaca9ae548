#include "subcal/numerics.hpp"

#include <charconv>
#include <system_error>

#include <boost/math/tools/minima.hpp>

namespace subcal {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kHuge = 1e300;

// Bisection on log x for the first point where pred flips to true; pred is
// false at lo and true at hi.
template <class Pred>
double log_bisect(Pred pred, double lo, double hi) {
  for (int i = 0; i < 200 && hi > lo * (1.0 + 4e-16); ++i) {
    double mid = std::sqrt(lo) * std::sqrt(hi);
    if (!(mid > lo && mid < hi)) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Geometric bracket expansion outward from 1, then log bisection.
template <class Pred>
double first_true(Pred pred) {
  double lo = 1.0;
  double hi = 1.0;
  if (pred(1.0)) {
    while (true) {
      lo = hi / 8.0;
      if (lo < kTiny) return pred(kTiny) ? 0.0 : log_bisect(pred, kTiny, hi);
      if (!pred(lo)) break;
      hi = lo;
    }
  } else {
    while (true) {
      hi = lo * 8.0;
      if (hi > kHuge) {
        if (!pred(kHuge)) return kInf;
        hi = kHuge;
        break;
      }
      if (pred(hi)) break;
      lo = hi;
    }
  }
  return log_bisect(pred, lo, hi);
}

}  // namespace

double inverse_nondecreasing(const std::function<double(double)>& h, double y) {
  return first_true([&](double x) { return h(x) >= y; });
}

double inverse_nonincreasing(const std::function<double(double)>& h, double y) {
  return first_true([&](double x) { return h(x) <= y; });
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log_grid needs 0 < lo <= hi");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

GridMax maximize_on_grid(std::span<const double> grid, const std::function<double(double)>& obj,
                         bool refine, int bits) {
  GridMax best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = obj(grid[i]);
    if (v > best.value) {
      best = GridMax{grid[i], v, i};
    }
  }
  if (!refine || grid.size() < 2 || !std::isfinite(best.value)) return best;
  const std::size_t i = best.index;
  const double lo = std::log(grid[i == 0 ? 0 : i - 1]);
  const double hi = std::log(grid[std::min(i + 1, grid.size() - 1)]);
  if (!(hi > lo)) return best;
  auto neg = [&](double v) {
    const double r = obj(std::exp(v));
    return std::isnan(r) ? kInf : -r;
  };
  std::uintmax_t iters = 100;
  auto [arg, val] = boost::math::tools::brent_find_minima(neg, lo, hi, bits, iters);
  if (-val > best.value) {
    best.arg = std::exp(arg);
    best.value = -val;
  }
  return best;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc()) throw Error("float formatting failed");
  return std::string(buf, res.ptr);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace subcal
