#include <doctest.h>

#include <cmath>

#include "subcal/phillips.hpp"
#include "subcal/rng.hpp"

using namespace subcal;

namespace {

Vec random_vec(Rng& rng, Eigen::Index n) {
  Vec u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.normal();
  return u;
}

}  // namespace

TEST_CASE("drift only reproduces A u") {
  auto g = Generator::path_laplacian(5);
  Rng rng(1);
  const Vec u = random_vec(rng, 5);
  auto r = phillips_apply(g, BernsteinFunction::identity(), u);
  CHECK((r.value - g.matrix() * u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("killing only reproduces a u") {
  auto g = Generator::doubly_stochastic_nonsym(5, 3);
  Rng rng(2);
  const Vec u = random_vec(rng, 5);
  auto r = phillips_apply(g, BernsteinFunction(2.5, 0.0, LevyMeasure::zero()), u);
  CHECK((r.value - 2.5 * u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("half-stable on the path(2) eigenvector") {
  auto g = Generator::path_laplacian(2);
  Vec u(2);
  u << 0.5, -0.5;
  auto r = phillips_apply(g, BernsteinFunction::stable(0.5), u);
  CHECK(r.value(0) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
  CHECK(r.value(1) == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-9));
}

TEST_CASE("atom measure is u - T_1 u") {
  auto g = Generator::doubly_stochastic_nonsym(6, 7);
  Rng rng(4);
  const Vec u = random_vec(rng, 6);
  auto r = phillips_apply(g, BernsteinFunction::one_minus_exp(), u);
  // oracle: the plain Taylor series of e^{-A}
  Mat term = Mat::Identity(6, 6), T = term;
  for (int k = 1; k < 40; ++k) {
    term = -term * g.matrix() / k;
    T += term;
  }
  CHECK((r.value - (u - T * u)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cross validation against spectral calculus") {
  auto p8 = Generator::path_laplacian(8);
  auto c6 = Generator::cycle_laplacian(6);
  CHECK(cross_validate(p8, BernsteinFunction::identity(), 10, 1).max_rel_error < 1e-14);
  auto s = cross_validate(p8, BernsteinFunction::stable(0.5), 100, 2);
  CHECK(s.pass);
  CHECK(s.max_rel_error <= 1e-6);
  auto a = cross_validate(c6, BernsteinFunction::one_minus_exp(), 50, 3, 1e-10);
  CHECK(a.max_rel_error <= 1e-10);
  for (const auto& f : {BernsteinFunction::stable(0.25), BernsteinFunction::stable(0.75),
                        BernsteinFunction::log1p(), BernsteinFunction::rational()}) {
    CHECK_MESSAGE(cross_validate(p8, f, 20, 5).pass, f.family());
    CHECK_MESSAGE(cross_validate(c6, f, 20, 6).pass, f.family());
  }
  auto bd = Generator::birth_death({1.0, 2.0, 0.5}, {3.0, 1.0, 2.0});
  CHECK(cross_validate(bd, BernsteinFunction::stable(0.5), 20, 9).pass);
}

TEST_CASE("tail-only measure integrates by parts") {
  auto g = Generator::path_laplacian(6);
  BernsteinFunction f(0, 0, LevyMeasure::tail_only([](double s) { return std::exp(-s); }, 1.0));
  auto want = spectral_apply(g, BernsteinFunction::rational()).matrix();
  PhillipsOperator op(g, f);
  CHECK((op.matrix() - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("linearity and accretivity") {
  Rng rng(9);
  auto g = Generator::doubly_stochastic_nonsym(6, 7);
  for (const auto& f : {BernsteinFunction::stable(0.5), BernsteinFunction::one_minus_exp(),
                        BernsteinFunction::log1p()}) {
    PhillipsOperator op(g, f);
    for (int k = 0; k < 50; ++k) {
      const Vec u = random_vec(rng, 6), v = random_vec(rng, 6);
      const double c = rng.normal();
      const Vec lhs = op.apply(u + c * v);
      const Vec rhs = op.apply(u) + c * op.apply(v);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
      CHECK(op.energy(u) >= -1e-10);
    }
  }
}

TEST_CASE("budget and bookkeeping") {
  PhillipsOperator op(Generator::path_laplacian(8), BernsteinFunction::stable(0.5));
  CHECK(op.evaluations() <= 20000);
  CHECK(op.split_point() == doctest::Approx(0.25));
  CHECK(op.error() < 1e-8);
}
