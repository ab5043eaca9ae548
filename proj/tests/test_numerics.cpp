#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subcal/numerics.hpp"
#include "subcal/rng.hpp"

using namespace subcal;

TEST_CASE("adaptive GK integrates smooth and singular integrands") {
  auto r = quad::adaptive<double>([](double x) { return std::cos(x); }, 0.0, 1.0, 0.0);
  CHECK(r.value == doctest::Approx(std::sin(1.0)).epsilon(1e-13));

  auto s = quad::from_zero<double>([](double x) { return 1.0 / std::sqrt(x); }, 1.0, 0.0);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-11));

  auto e = quad::to_infinity<double>([](double x) { return std::exp(-x); }, 1.0, 0.0);
  CHECK(e.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-11));

  // int_0^inf dx / (1 + x^2) = pi / 2
  auto h = quad::half_line<double>([](double x) { return 1.0 / (1.0 + x * x); }, 1.0, 0.0);
  CHECK(h.value == doctest::Approx(std::numbers::pi / 2).epsilon(1e-11));
}

TEST_CASE("matrix-valued quadrature integrates entrywise") {
  Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  auto r = quad::adaptive<Eigen::Matrix2d>(
      [](double t) {
        Eigen::Matrix2d m;
        m << t, t * t, std::exp(t), 1.0;
        return m;
      },
      0.0, 2.0, zero);
  CHECK(r.value(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.value(0, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(r.value(1, 0) == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-13));
  CHECK(r.value(1, 1) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("divergent improper integral raises QuadratureError") {
  CHECK_THROWS_AS(quad::to_infinity<double>([](double x) { return 1.0 / x; }, 1.0, 0.0),
                  QuadratureError);
}

TEST_CASE("generalized inverses") {
  auto sq = [](double x) { return x * x; };
  CHECK(inverse_nondecreasing(sq, 9.0) == doctest::Approx(3.0).epsilon(1e-14));
  auto bounded = [](double x) { return x / (1.0 + x); };
  CHECK(std::isinf(inverse_nondecreasing(bounded, 2.0)));
  auto floor = [](double x) { return 1.0 + x; };
  CHECK(inverse_nondecreasing(floor, 0.5) == 0.0);
  auto dec = [](double x) { return 1.0 / x; };
  CHECK(inverse_nonincreasing(dec, 4.0) == doctest::Approx(0.25).epsilon(1e-14));
  // step function: first point where the step reaches the level
  auto step = [](double x) { return x < 2.0 ? 0.0 : 1.0; };
  CHECK(inverse_nondecreasing(step, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("grid maximisation refines between neighbours") {
  auto obj = [](double x) {
    const double d = std::log(x) - 1.0;
    return -d * d;
  };
  auto grid = log_grid(0.1, 100.0, 16);
  auto best = maximize_on_grid(grid, obj);
  CHECK(best.arg == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
  CHECK(best.value <= 0.0);
  auto raw = maximize_on_grid(grid, obj, false);
  CHECK(best.value >= raw.value);
}

TEST_CASE("ties resolve to the smallest index") {
  std::vector<double> grid{1.0, 2.0, 3.0};
  auto best = maximize_on_grid(grid, [](double) { return 1.0; }, false);
  CHECK(best.index == 0);
}

TEST_CASE("float formatting round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("rng streams are deterministic") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  CHECK(Rng::split(1, 0) != Rng::split(1, 1));
  Rng c(7);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double z = c.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(sq / 20000 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
