#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subcal/nash.hpp"
#include "subcal/rng.hpp"

using namespace subcal;

namespace {

RateFunction lin() { return RateFunction::power(1.0, 1.0, "s"); }

const std::vector<double> kTGrid{0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10};

}  // namespace

TEST_CASE("decay profile closed forms") {
  DecayProfile p(lin());
  for (double t : {0.01, 0.5, 1.0, 3.0, 100.0}) {
    CHECK(p.G(t) == doctest::Approx((1 - 1 / t) / 2).epsilon(1e-11));
  }
  CHECK(p.G(1.0) == 0.0);
  for (double y : {-50.0, -1.0, 0.0, 0.2, 0.45}) {
    CHECK(p.G_inverse(y) == doctest::Approx(1 / (1 - 2 * y)).epsilon(1e-10));
  }
  CHECK(p.G_sup() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::isinf(p.G_inverse(0.5 + 1e-9)));
  CHECK(p.G_inverse(0.5 - 1e-6) == doctest::Approx(5e5).epsilon(1e-6));
  CHECK(p.diverges_at_zero());

  const double c = 3.0;
  DecayProfile flat(RateFunction(RateFunction::Direction::increasing,
                                 [c](double s) { return c * (1 + 1e-15 * s); }, "flat"));
  for (double t : {1e-3, 0.5, 7.0, 1e4}) {
    CHECK(flat.G(t) == doctest::Approx(std::log(t) / (2 * c)).epsilon(1e-9));
  }
  CHECK(flat.diverges_at_zero());

  DecayProfile sq(RateFunction::power(1.0, 2.0));
  for (double t : {0.1, 1.0, 2.0, 50.0}) {
    CHECK(sq.G(t) == doctest::Approx((1 - 1 / (t * t)) / 4).epsilon(1e-11));
  }
}

TEST_CASE("decay profile of a step rate matches the piecewise logarithm") {
  // B = 1 on (0,1), 2 on [1,4), 4 on [4, inf)
  auto B = RateFunction::step(RateFunction::Direction::increasing, {1.0, 4.0}, {2.0, 4.0},
                              [](double) { return 1.0; }, [](double) { return 4.0; }, {}, 1.0, 4.0, "step");
  DecayProfile p(B);
  auto G = [](double t) {
    if (t < 1) return std::log(t) / 2;
    if (t < 4) return std::log(t) / 4;
    return std::log(4.0) / 4 + std::log(t / 4) / 8;
  };
  for (double t : {0.01, 0.7, 1.0, 2.5, 4.0, 9.0, 1e3}) CHECK(p.G(t) == doctest::Approx(G(t)).epsilon(1e-12));
  CHECK(p.G_between(0.5, 8.0) == doctest::Approx(G(8.0) - G(0.5)).epsilon(1e-12));
  CHECK(std::isinf(p.G_sup()));
  for (double t : {0.01, 0.7, 2.5, 9.0}) CHECK(p.G_inverse(p.G(t)) == doctest::Approx(t).epsilon(1e-9));
}

TEST_CASE("decay bound examples") {
  DecayProfile p(lin());
  CHECK(decay_bound(p, 1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(decay_bound(p, 0.7, 0.0) == 0.7);
  CHECK(decay_bound(p, 2.0, kInf) == 0.0);
  CHECK(decay_bound(p, 2.0, 1e12) < 1e-11);
  for (double x0 : {0.1, 1.0, 5.0}) {
    double prev = kInf;
    for (double t : kTGrid) {
      const double b = decay_bound(p, x0, t);
      CHECK(b == doctest::Approx(x0 / (1 + 2 * t * x0)).epsilon(1e-9));
      CHECK(b <= prev);
      prev = b;
    }
  }
  // nondecreasing in x0
  CHECK(decay_bound(p, 1.0, 0.3) <= decay_bound(p, 1.1, 0.3));
}

TEST_CASE("subordinate Nash bound examples") {
  auto B = lin();
  auto id = BernsteinFunction::identity();
  CHECK(subordinate_nash_bound(1.0, B, id, NashVariant::symmetric()) == 0.25);
  CHECK(subordinate_nash_bound(1.0, B, id, NashVariant::nonsymmetric()) == 0.25);
  CHECK(subordinate_nash_bound(2.0, B, id, NashVariant::epsilon(0.3)) == doctest::Approx(0.09 * 4.0));
  const double sup = subordinate_nash_bound(1.0, B, id, NashVariant::epsilon_sup());
  CHECK(sup <= 1.0);
  CHECK(sup > 0.9999);
  CHECK(sup > subordinate_nash_bound(1.0, B, id, NashVariant::symmetric()));
  for (double x : {0.1, 0.5, 3.0}) {
    CHECK(subordinate_nash_bound(x, B, id, NashVariant::symmetric()) == (x / 2) * B(x / 2));
  }
  CHECK_THROWS_AS(subordinate_nash_bound(1.0, B, id, NashVariant::epsilon(1.0)), DomainError);
}

TEST_CASE("epsilon_sup dominates the symmetric bound") {
  auto B = RateFunction::power(2.0, 0.7);
  for (const auto& f : {BernsteinFunction::stable(0.25), BernsteinFunction::stable(0.75),
                        BernsteinFunction::one_minus_exp(), BernsteinFunction::log1p()}) {
    for (double x : log_grid(1e-3, 1e3, 13)) {
      const double s = subordinate_nash_bound(x, B, f, NashVariant::symmetric());
      const double e = subordinate_nash_bound(x, B, f, NashVariant::epsilon_sup());
      CHECK(e >= s - 1e-12 * s);
      CHECK(subordinate_nash_bound(x, B, f, NashVariant::epsilon(0.5)) == s);
    }
  }
}

TEST_CASE("verify_nash on path(2) and negative controls") {
  auto g = Generator::path_laplacian(2);
  Vec u(2);
  u << 0.5, -0.5;
  auto B = RateFunction::constant(2.0, RateFunction::Direction::increasing);
  auto ok = verify_nash(g, B, std::vector<Vec>{u});
  CHECK(ok.rows[0].margin == doctest::Approx(0.0).scale(1));
  CHECK(ok.pass);
  auto bad = verify_nash(g, B.scaled(10.0), std::vector<Vec>{u});
  CHECK_FALSE(bad.pass);
  Vec k(2);
  k << 0.5, 0.5;
  auto ker = verify_nash(g, B, std::vector<Vec>{k});
  CHECK(ker.rows[0].margin == doctest::Approx(-0.5 * 2.0));
  CHECK_FALSE(ker.pass);
}

TEST_CASE("fit_B examples") {
  auto p2 = Generator::path_laplacian(2);
  auto phi2 = PhiFunctional::l1_squared(p2.space());
  SamplerConfig cfg;
  cfg.count = 50;
  auto fit = fit_B(p2, phi2, {}, cfg);
  CHECK(fit.x_sup == doctest::Approx(0.5));
  CHECK(fit.rate(0.5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(verify_nash(p2, fit.rate, phi2, cfg).pass);

  auto zero = Generator::birth_death({0.0}, {0.0});
  CHECK_THROWS_AS(fit_B(zero, PhiFunctional::l1_squared(zero.space()), {}, cfg), DegenerateError);

  // complete(3): A is the identity on mean-zero vectors, so the optimal rate is 1
  auto k3 = Generator::complete_laplacian(3);
  auto fk = fit_B(k3, PhiFunctional::l1_squared(k3.space()), {}, cfg);
  CHECK(fk.x_sup == doctest::Approx(0.5));
  CHECK(fk.x_sup_exact);
  for (double x : fk.grid) CHECK(fk.rate(x) == doctest::Approx(1.0).epsilon(1e-12));

  auto dropped = fit_B(k3, PhiFunctional::l1_squared(k3.space()), {0.4, 0.45, 0.9}, cfg);
  CHECK(dropped.grid.size() == 2);
  CHECK(dropped.warnings.size() == 1);
}

TEST_CASE("fitted B holds on fresh vectors drawn independently") {
  auto g = Generator::path_laplacian(8);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 300;
  auto fit = fit_B(g, phi, {}, cfg);
  CHECK(fit.rate.check_monotone(log_grid(1e-3, 10.0, 200)));
  CHECK(fit.floor == doctest::Approx(2 - 2 * std::cos(M_PI / 8)).epsilon(1e-6));
  Rng rng(999);
  const auto& sp = g.space();
  double worst = kInf;
  for (int k = 0; k < 20000; ++k) {
    Vec u(8);
    for (int i = 0; i < 8; ++i) u(i) = rng.normal() * std::pow(rng.uniform_open0(), 3 * (k % 3));
    u = phi.normalize(g.project_to_sector(u));
    const double x = sp.norm2_sq(u);
    worst = std::min(worst, g.energy(u) - x * fit.rate(x));
  }
  CHECK(worst >= -1e-10);
}

TEST_CASE("theorem chain on symmetric and non-symmetric generators") {
  auto g = Generator::path_laplacian(8);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 200;
  auto fit = fit_B(g, phi, {}, cfg);
  for (const auto& f : {BernsteinFunction::stable(0.5), BernsteinFunction::identity()}) {
    for (auto v : {NashVariant::symmetric(), NashVariant::epsilon_sup()}) {
      auto rep = verify_theorem(g, f, fit.rate, phi, v, cfg);
      CHECK_MESSAGE(rep.pass, v.label());
    }
  }
  CHECK_THROWS_AS(verify_theorem(g, BernsteinFunction::identity(), fit.rate.scaled(10.0), phi,
                                 NashVariant::symmetric(), cfg),
                  HypothesisError);

  auto ds = Generator::doubly_stochastic_nonsym(6, 7);
  auto phid = PhiFunctional::l1_squared(ds.space());
  auto fd = fit_B(ds, phid, {}, cfg);
  auto rep = verify_theorem(ds, BernsteinFunction::one_minus_exp(), fd.rate, phid, NashVariant::nonsymmetric(), cfg);
  CHECK(rep.pass);
  CHECK(rep.note.find("Phillips") != std::string::npos);
}

TEST_CASE("linear f: near-equality at the slowest eigenvector") {
  auto g = Generator::path_laplacian(4);
  auto phi = PhiFunctional::l1_squared(g.space());
  Vec u = phi.normalize(g.eigenvectors().col(1));
  const double x = g.space().norm2_sq(u);
  const double lam = g.eigenvalues()(1);
  auto B = RateFunction::constant(lam, RateFunction::Direction::increasing);
  auto nash = verify_nash(g, B, std::vector<Vec>{u});
  CHECK(std::abs(nash.rows[0].margin) < 1e-14);
  auto thm = verify_theorem(g, BernsteinFunction::identity(), B, std::vector<Vec>{u}, NashVariant::symmetric());
  CHECK(thm.rows[0].margin == doctest::Approx(x * lam - x / 2 * lam));
}

TEST_CASE("decay equivalence") {
  auto p2 = Generator::path_laplacian(2);
  Vec u(2);
  u << 0.5, -0.5;
  auto B = RateFunction::constant(2.0, RateFunction::Direction::increasing);
  auto eq = verify_decay_equivalence(p2, B, std::vector<Vec>{u}, kTGrid);
  CHECK(eq.forward.pass);
  CHECK(eq.forward.rows[0].margin == 0.0);  // t = 0
  // ||T_t u||^2 = e^{-4t}/2 and the bound is exactly that for B = 2
  for (const auto& r : eq.forward.rows) CHECK(r.rhs == doctest::Approx(std::exp(-4 * r.param) / 2).epsilon(1e-12));
  CHECK(eq.converse.pass);

  auto half = verify_decay_equivalence(p2, B.scaled(0.5), std::vector<Vec>{u}, {0.5, 1.0});
  for (const auto& r : half.forward.rows) CHECK(r.margin > 0.0);

  auto g = Generator::path_laplacian(6);
  auto phi = PhiFunctional::l1_squared(g.space());
  SamplerConfig cfg;
  cfg.count = 100;
  auto fit = fit_B(g, phi, {}, cfg);
  auto e2 = verify_decay_equivalence(g, fit.rate, phi, cfg, kTGrid);
  CHECK(e2.forward.min_margin >= -1e-8);
  CHECK(e2.converse.min_margin >= -1e-4);
}

TEST_CASE("g integral") {
  DecayProfile p(lin());
  CHECK(g_integral(1.0, p, LevyMeasure::zero()) == 0.0);
  for (double r : {0.5, 1.0, 2.0}) {
    for (double s : {0.3, 1.0, 4.0}) {
      const double exact = r * r * s / (1 + r * s);
      CHECK(g_integral(r, p, LevyMeasure::atoms({{s, 1.0}})) == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  auto sw = check_g_sandwich({0.5, 1.0, 2.0}, p, BernsteinFunction::stable(0.5));
  CHECK(sw.pass);
  auto sa = check_g_sandwich({0.5, 1.0, 2.0}, p, BernsteinFunction::one_minus_exp());
  CHECK(sa.pass);
  for (const auto& f : {BernsteinFunction::stable(0.25), BernsteinFunction::log1p(), BernsteinFunction::rational()}) {
    CHECK_MESSAGE(check_g_sandwich({0.1, 1.0, 10.0}, p, f).pass, f.family());
  }
  CHECK_THROWS_AS(check_g_sandwich({1.0}, p, BernsteinFunction(0, 0, LevyMeasure::zero())), DomainError);
}

TEST_CASE("half-stable g integral against an independent closed form") {
  // B(s) = s: 2(G(r) - G(u)) = 1/u - 1/r, tail(y) = y^{-1/2}/sqrt(pi), so
  // g(r) = int_0^r sqrt(u r/(r-u)) du / sqrt(pi) = r^{3/2} (pi/2) / sqrt(pi).
  DecayProfile p(lin());
  auto f = BernsteinFunction::stable(0.5);
  for (double r : {0.5, 1.0, 2.0}) {
    const double exact = std::pow(r, 1.5) * std::numbers::pi / 2 / std::sqrt(std::numbers::pi);
    CHECK(g_integral(r, p, f.nu()) == doctest::Approx(exact).epsilon(1e-8));
  }
}

TEST_CASE("mean-value inequality on random pairs") {
  Rng rng(17);
  std::vector<std::pair<double, double>> pairs;
  for (int k = 0; k < 50; ++k) {
    const double u = std::exp(rng.uniform(-5, 5));
    pairs.push_back({u, u * std::exp(rng.uniform(0.01, 3))});
  }
  CHECK(check_mean_value(DecayProfile(lin()), pairs).pass);
  CHECK(check_mean_value(DecayProfile(RateFunction::power(0.3, 0.5)), pairs).pass);
}

TEST_CASE("Phi functional properties") {
  auto g = Generator::doubly_stochastic_nonsym(5, 2);
  auto phi = PhiFunctional::l1_squared(g.space());
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    Vec u(5);
    for (int i = 0; i < 5; ++i) u(i) = rng.normal();
    const double c = rng.normal();
    CHECK(phi(c * u) == doctest::Approx(c * c * phi(u)).epsilon(1e-14));
    CHECK(phi(g.semigroup(rng.uniform(0, 3)) * u) <= phi(u) * (1 + 1e-10));
  }
}
