#include <doctest.h>

#include <cmath>

#include "subcal/contractivity.hpp"
#include "subcal/nash.hpp"

using namespace subcal;

TEST_CASE("eta closed forms") {
  auto id = BernsteinFunction::identity();
  auto lin = RateFunction::power(1.0, 1.0);
  auto e1 = EtaProfile::nash(id, lin);
  auto e2 = EtaProfile::plain(BernsteinFunction::stable(0.5));
  for (double t : log_grid(1e-3, 1e3, 13)) {
    CHECK(e1.eta(t) == doctest::Approx(1 / t).epsilon(1e-8));
    CHECK(e2.eta(t) == doctest::Approx(2 / std::sqrt(t)).epsilon(1e-8));
  }
  CHECK(std::isinf(EtaProfile::plain(BernsteinFunction::log1p()).eta(1.0)));
  CHECK(std::isinf(EtaProfile::nash(id, RateFunction::constant(2.0, RateFunction::Direction::increasing)).eta(1.0)));
  CHECK_FALSE(EtaProfile::plain(BernsteinFunction::one_minus_exp()).finite());
  for (double y : {0.01, 1.0, 30.0}) {
    CHECK(e1.inverse(y) == doctest::Approx(1 / y).epsilon(1e-10));
    CHECK(e2.inverse(y) == doctest::Approx(4 / (y * y)).epsilon(1e-10));
  }
}

TEST_CASE("eta of a fitted step rate is decreasing and convex") {
  auto g = Generator::path_laplacian(8);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 100;
  auto fit = fit_B(g, phi, {}, cfg);
  for (const auto& f : {BernsteinFunction::stable(0.5), BernsteinFunction::identity()}) {
    auto e = EtaProfile::nash(f, fit.rate);
    REQUIRE(e.finite());
    const auto ts = linear_grid(0.01, 2.0, 60);
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
      const double a = e.eta(ts[i - 1]), b = e.eta(ts[i]), c = e.eta(ts[i + 1]);
      CHECK(b < a);
      CHECK(a - 2 * b + c >= -1e-9);
    }
  }
}

TEST_CASE("ondiag bound closed forms") {
  auto e1 = EtaProfile::nash(BernsteinFunction::identity(), RateFunction::power(1.0, 1.0));
  auto e2 = EtaProfile::plain(BernsteinFunction::stable(0.5));
  double prev = kInf;
  for (double t : log_grid(1e-2, 1e2, 9)) {
    CHECK(ondiag_bound(e1, t) == doctest::Approx(4 / t).epsilon(1e-9));
    CHECK(ondiag_bound(e2, t) == doctest::Approx(32 / (t * t)).epsilon(1e-9));
    CHECK(ondiag_bound(e1, t) <= prev);
    prev = ondiag_bound(e1, t);
  }
  CHECK(ondiag_bound(e1, 1e12) < 1e-11);
}

TEST_CASE("ondiag dominance on path(16), half-stable") {
  auto g = Generator::path_laplacian(16);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 300;
  auto fit = fit_B(g, phi, {}, cfg);
  auto rep = verify_ondiag(g, BernsteinFunction::stable(0.5), fit.rate, phi, cfg, log_grid(0.05, 50.0, 20));
  CHECK(rep.asserted);
  for (const auto& r : rep.bound.rows) MESSAGE("t=" << r.x << " measured=" << r.value << " bound=" << r.upper);
  CHECK(rep.bound.pass);
}

TEST_CASE("ondiag with f = id agrees with the decay-derived kernel bound") {
  // ||T_{2t} - Pi||_{1->inf} = ||T_t - Pi||_{1->2}^2, and the decay bound
  // controls ||T_t u||^2 for every sector vector u = (I - Pi) delta_y / m_y.
  auto g = Generator::path_laplacian(6);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 300;
  auto fit = fit_B(g, phi, {}, cfg);
  DecayProfile prof(fit.rate);
  const auto& sp = g.space();
  const Mat pi = g.equilibrium_projection();
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const double measured = norm_1_to_inf(Mat(g.semigroup(2 * t) - pi), sp);
    double bound = 0.0;
    for (Eigen::Index y = 0; y < 6; ++y) {
      Vec u = (Mat::Identity(6, 6) - pi) * Vec::Unit(6, y) / sp.m()(y);
      const double p = phi(u);
      bound = std::max(bound, p * decay_bound(prof, sp.norm2_sq(u) / p, t));
    }
    CHECK(measured <= bound * (1 + 1e-8));
  }
  auto rep = verify_ondiag(g, BernsteinFunction::identity(), fit.rate, phi, cfg, {0.1, 1.0, 10.0});
  CHECK(rep.asserted);
  CHECK(rep.curves.size() == 2);
}

TEST_CASE("ondiag without the hypothesis reports curves only") {
  auto g = Generator::path_laplacian(4);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 50;
  auto rep = verify_ondiag(g, BernsteinFunction::stable(0.5), RateFunction::power(100.0, 1.0), phi, cfg, {1.0});
  CHECK_FALSE(rep.asserted);
  CHECK(rep.bound.pass);
  CHECK(rep.bound.rows.size() == 1);
}

TEST_CASE("classification examples") {
  auto a = classify_contractivity(BernsteinFunction::stable(0.75), 2.0);
  CHECK(a.has("ultra"));
  CHECK(a.has("super"));
  CHECK(a.integral == doctest::Approx(2.0).epsilon(1e-5));
  auto b = classify_contractivity(BernsteinFunction::stable(0.5), 2.0);
  CHECK(b.has("hyper"));
  CHECK(b.limit == doctest::Approx(1.0).epsilon(0.01));
  CHECK_FALSE(b.has("ultra"));
  auto c = classify_contractivity(BernsteinFunction::stable(0.25), 2.0);
  CHECK(c.has("not_hyper"));
  CHECK(c.labels.size() == 1);
  for (const auto& f : {BernsteinFunction::log1p(), BernsteinFunction::one_minus_exp(), BernsteinFunction::rational()}) {
    auto k = classify_contractivity(f, 2.0);
    CHECK(k.has("not_hyper"));
    CHECK_FALSE(k.has("ultra"));
  }
  auto id = classify_contractivity(BernsteinFunction::identity(), 1.5);
  CHECK(id.has("ultra"));
  CHECK(id.has("super"));
  CHECK_THROWS_AS(classify_contractivity(BernsteinFunction::identity(), 1.0), DomainError);
}

TEST_CASE("classification sweep has no contradictions") {
  std::vector<Classification> rows;
  for (double delta : {1.5, 2.0, 3.0}) {
    for (int k = 1; k <= 9; ++k) {
      const double alpha = 0.1 * k;
      auto c = classify_contractivity(BernsteinFunction::stable(alpha), delta);
      CHECK(c.labels.size() >= 1);
      if (c.has("ultra")) CHECK_FALSE(c.has("not_hyper"));
      CHECK_FALSE(c.has("indeterminate"));
      const double ad = alpha * delta;
      if (std::abs(ad - 1) < 1e-9) {
        CHECK(c.has("hyper"));
      } else if (ad > 1) {
        CHECK(c.has("ultra"));
        CHECK(c.has("super"));
      } else {
        CHECK(c.has("not_hyper"));
        CHECK_FALSE(c.has("ultra"));
      }
      rows.push_back(c);
    }
  }
  const auto csv = classification_csv(rows);
  CHECK(csv.rfind("family,delta,integral,limit,limit_kind,labels\n", 0) == 0);
}

TEST_CASE("decay inheritance") {
  auto g = Generator::path_laplacian(8);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 100;
  const auto ts = log_grid(0.1, 10.0, 12);
  const double delta = 0.5;
  const double c0 = fit_decay_constant(g, phi, delta, ts, cfg);
  auto id = subordinate_decay_check(g, BernsteinFunction::identity(), phi, delta, c0, ts, cfg);
  CHECK(id.pass);
  // f = id: eta^{-1}(t) = 1/t, so the ratio is the hypothesis ratio over c0
  for (double r : id.ratio) CHECK(r <= 1.0);
  auto half = subordinate_decay_check(g, BernsteinFunction::stable(0.5), phi, delta, c0, ts, cfg);
  CHECK(half.pass);
  CHECK_THROWS_AS(subordinate_decay_check(g, BernsteinFunction::log1p(), phi, delta, c0, ts, cfg), HypothesisError);
  CHECK_THROWS_AS(subordinate_decay_check(g, BernsteinFunction::identity(), phi, delta, c0 / 10, ts, cfg),
                  HypothesisError);
}
