#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subcal/bernstein.hpp"

using namespace subcal;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

BernsteinFunction half_stable_density_only() {
  // t^{-3/2} / (2 sqrt(pi)), no closed-form tail and no closed-form f.
  return BernsteinFunction(
      0.0, 0.0,
      LevyMeasure::density([](double t) { return std::pow(t, -1.5) / (2.0 * kSqrtPi); }, 1.5));
}

}  // namespace

TEST_CASE("eval examples") {
  CHECK(BernsteinFunction::identity().eval(2.0) == 2.0);
  CHECK(BernsteinFunction(0, 1, LevyMeasure::zero()).eval(2.0) == 2.0);
  CHECK(half_stable_density_only().eval(4.0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(BernsteinFunction(0, 0, LevyMeasure::atoms({{1.0, 1.0}})).eval(1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(BernsteinFunction::identity().eval(-1.0), DomainError);
}

TEST_CASE("stable quadrature matches l^alpha") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    auto f = BernsteinFunction::stable(alpha);
    for (double l : log_grid(1e-3, 1e3, 13)) {
      CHECK(f.eval_quadrature(l) == doctest::Approx(std::pow(l, alpha)).epsilon(1e-8));
    }
  }
}

TEST_CASE("other families agree with their closed forms") {
  for (const auto& f : {BernsteinFunction::log1p(), BernsteinFunction::rational(),
                        BernsteinFunction::one_minus_exp()}) {
    auto rep = closed_form_agreement(f, log_grid(1e-3, 1e3, 13));
    CHECK_MESSAGE(rep.pass, f.family());
  }
  // log1p without its closed-form tail: the tail comes from quadrature of the density
  BernsteinFunction g(0, 0, LevyMeasure::density([](double t) { return std::exp(-t) / t; }, 1.0));
  CHECK(g.eval(3.0) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  CHECK(g.nu().tail(1.0) == doctest::Approx(0.21938393439552029).epsilon(1e-9));
}

TEST_CASE("tail-only measure evaluates by parts") {
  BernsteinFunction f(0, 0, LevyMeasure::tail_only([](double s) { return std::exp(-s); }, 1.0));
  CHECK(f.eval(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("inverse examples") {
  CHECK(BernsteinFunction::stable(0.5).inverse(2.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(BernsteinFunction::identity().inverse(7.5) == 7.5);
  CHECK(BernsteinFunction::one_minus_exp().inverse(0.5) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  auto f = BernsteinFunction::one_minus_exp();
  CHECK_THROWS_AS(f.inverse(1.5), RangeError);
  CHECK(std::isinf(f.inverse(1.0)));
  CHECK_THROWS_AS(BernsteinFunction(0, 0, LevyMeasure::zero()).inverse(1.0), DegenerateError);

  // bisection path (no closed-form inverse)
  auto g = half_stable_density_only();
  const double l = g.inverse(2.0);
  CHECK(std::abs(g.eval(l) - 2.0) <= 1e-10 * 2.0);
}

TEST_CASE("inverse undoes eval on the interior of the range") {
  for (const auto& f : {BernsteinFunction::stable(0.25), BernsteinFunction::log1p(),
                        BernsteinFunction::rational(), BernsteinFunction::one_minus_exp()}) {
    for (double l : log_grid(1e-2, 20.0, 9)) {
      CHECK(f.inverse(f.eval(l)) == doctest::Approx(l).epsilon(1e-8));
    }
  }
}

TEST_CASE("nu1 examples") {
  auto f = BernsteinFunction::stable(0.5);
  CHECK(f.nu().nu1(1.0) == doctest::Approx(2.0 / kSqrtPi).epsilon(1e-10));
  CHECK(f.nu().nu1(9.0) == doctest::Approx(6.0 / kSqrtPi).epsilon(1e-10));
  CHECK(LevyMeasure::atoms({{1.0, 1.0}}).nu1(2.0) == 1.0);
  CHECK(LevyMeasure::zero().nu1(3.0) == 0.0);
  // density without a tail: int min(t, x) nu(dt)
  CHECK(half_stable_density_only().nu().nu1(1.0) == doctest::Approx(2.0 / kSqrtPi).epsilon(1e-9));
}

TEST_CASE("rejects non-Levy measures") {
  CHECK_THROWS_AS(LevyMeasure::density([](double t) { return std::pow(t, -2.5); }, 2.5),
                  DomainError);
  CHECK_THROWS_AS(LevyMeasure::atoms({{-1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(LevyMeasure::tail_only([](double s) { return s; }), DomainError);
}

TEST_CASE("integrated tail sandwich") {
  auto f = BernsteinFunction::stable(0.5);
  auto rep = check_okura_bounds(f, {1.0});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].lower == doctest::Approx((1 - std::exp(-1.0)) * 2 / kSqrtPi).epsilon(1e-9));
  CHECK(rep.rows[0].value == doctest::Approx(1.0));
  CHECK(rep.rows[0].upper == doctest::Approx(2 / kSqrtPi).epsilon(1e-9));
  CHECK(rep.pass);

  auto atom = check_okura_bounds(BernsteinFunction::one_minus_exp(), {1.0});
  CHECK(atom.rows[0].lower == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(atom.rows[0].value == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(atom.rows[0].upper == 1.0);
  CHECK(atom.pass);

  CHECK_THROWS_AS(check_okura_bounds(BernsteinFunction(0, 0, LevyMeasure::zero()), {1.0}),
                  DomainError);
  CHECK_THROWS_AS(check_okura_bounds(BernsteinFunction::identity(), {1.0}), DomainError);

  for (const auto& g : {BernsteinFunction::stable(0.25), BernsteinFunction::stable(0.75),
                        BernsteinFunction::log1p(), BernsteinFunction::rational()}) {
    CHECK_MESSAGE(check_okura_bounds(g, log_grid(1e-3, 1e3, 30)).pass, g.family());
  }
}

TEST_CASE("integrated tail far from the origin") {
  // int_0^x E1 = x E1(x) + 1 - e^{-x}; int_0^x e^{-s} ds = 1 - e^{-x}
  auto lg = BernsteinFunction::log1p();
  auto rat = BernsteinFunction::rational();
  for (double x : {1.0, 3.0, 50.0, 1e3, 1e5}) {
    // x E1(x) from the continued fraction E1(x) = e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + ...))))
    double cf = 0.0;
    for (int k = 200; k >= 1; --k) cf = k / (1.0 + k / (x + cf));
    const double xe1 = x * std::exp(-x) / (x + cf);
    CHECK(lg.nu().nu1(x) == doctest::Approx(xe1 + 1.0 - std::exp(-x)).epsilon(1e-10));
    CHECK(rat.nu().nu1(x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-10));
  }
}

TEST_CASE("elementary inequality behind the sandwich constant") {
  const double c = (std::numbers::e - 1.0) / std::numbers::e;
  for (double r : log_grid(1e-6, 1e3, 200)) {
    const double mid = -std::expm1(-r);
    CHECK(c * std::min(1.0, r) <= mid * (1 + 1e-15));
    CHECK(mid <= std::min(1.0, r) * (1 + 1e-15));
  }
}

TEST_CASE("subadditivity") {
  auto lin = check_subadditivity(BernsteinFunction::identity(), {3.0});
  CHECK(lin.rows[0].lower == 3.0);
  CHECK(lin.pass);
  auto root = check_subadditivity(BernsteinFunction::stable(0.5), {4.0});
  CHECK(root.rows[0].lower == doctest::Approx(std::sqrt(8.0) / 2));
  CHECK(root.pass);
  auto sq = BernsteinFunction::unchecked([](double l) { return l * l; }, "square");
  auto bad = check_subadditivity(sq, {1.0});
  CHECK(bad.rows[0].lower == 2.0);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("subordinator Laplace transform") {
  auto f = BernsteinFunction::stable(0.5);
  auto rep = subordinator_laplace_check(f, 1.0, {0.0, 1.0});
  CHECK(rep.rows[0].value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.rows[1].value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(rep.pass);
  auto rep2 = subordinator_laplace_check(f, 2.0, {4.0, 0.01, 100.0});
  CHECK(rep2.rows[0].value == doctest::Approx(std::exp(-4.0)).epsilon(1e-9));
  CHECK(rep2.pass);
  CHECK_THROWS_AS(subordinator_laplace_check(BernsteinFunction::stable(0.25), 1.0, {1.0}),
                  DomainError);
}

TEST_CASE("monotone and concave on a log grid") {
  for (const auto& f : {BernsteinFunction::stable(0.5), BernsteinFunction::log1p(),
                        BernsteinFunction::rational(), BernsteinFunction::one_minus_exp(),
                        BernsteinFunction::identity()}) {
    CHECK_MESSAGE(check_shape(f, log_grid(1e-3, 1e3, 40)).pass, f.family());
  }
  auto sq = BernsteinFunction::unchecked([](double l) { return l * l; }, "square");
  CHECK_FALSE(check_shape(sq, log_grid(1e-1, 1e1, 10)).pass);
}

TEST_CASE("sup and infinity") {
  CHECK(BernsteinFunction::rational().sup() == 1.0);
  CHECK(BernsteinFunction::one_minus_exp().eval(kInf) == 1.0);
  CHECK(std::isinf(BernsteinFunction::stable(0.5).sup()));
  CHECK(std::isinf(BernsteinFunction::log1p().eval(kInf)));
}
