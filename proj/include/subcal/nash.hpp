#pragma once

// Nash-type inequalities ||u||^2 B(||u||^2) <= <Au, u> on Phi(u) = 1, their
// decay profiles, and the subordinate transforms.

#include <string>
#include <vector>

#include "subcal/bernstein.hpp"
#include "subcal/operator.hpp"
#include "subcal/rate.hpp"
#include "subcal/report.hpp"
#include "subcal/sampling.hpp"

namespace subcal {

/// G(t) = int_1^t ds / (2 s B(s)) and its generalized inverse.
class DecayProfile {
public:
  explicit DecayProfile(RateFunction B);

  const RateFunction& B() const { return B_; }
  double G(double x) const;
  /// G(r) - G(u) for 0 < u <= r, integrated directly.
  double G_between(double u, double r) const;
  /// Same with both arguments given as logarithms.
  double G_between_log(double log_u, double log_r) const;
  /// G(r) - G(r e^{-gap}), accurate when gap is tiny.
  double G_below(double log_r, double gap) const;
  /// Generalized inverse: 0 below inf G, inf at or above sup G.
  double G_inverse(double y) const;
  double G_sup() const { return g_sup_; }
  /// Certificate that G(0+) = -inf.
  bool diverges_at_zero() const;

private:
  RateFunction B_;
  std::vector<double> log_breaks_;  // includes 0
  std::vector<double> cum_;         // G at each break
  double g_sup_ = kInf;

  double piece(double a, double b) const;  // no break inside (a, b)
  double integrate_log(double a, double b) const;
};

/// G^{-1}(G(x0) - t); x0 at t = 0.
double decay_bound(const DecayProfile& profile, double x0, double t);

struct NashVariant {
  enum class Kind { symmetric, nonsymmetric, epsilon, epsilon_sup };
  Kind kind = Kind::symmetric;
  double eps = 0.5;

  static NashVariant symmetric() { return {Kind::symmetric, 0.5}; }
  static NashVariant nonsymmetric() { return {Kind::nonsymmetric, 0.5}; }
  static NashVariant epsilon(double e) { return {Kind::epsilon, e}; }
  static NashVariant epsilon_sup() { return {Kind::epsilon_sup, 0.5}; }
  std::string label() const;
};

/// (x/2) f(B(x/2)), (x/4) f(2B(x/2)), (1-e) x f(e B(e x)/(1-e)) or the sup
/// of the last over e in (0, 1).
double subordinate_nash_bound(double x, const RateFunction& B, const BernsteinFunction& f,
                              NashVariant variant);

/// Epsilon-transform value and the maximising epsilon for epsilon_sup.
struct EpsilonSup {
  double value = 0.0;
  double eps = 0.5;
};
EpsilonSup epsilon_sup_bound(double x, const RateFunction& B, const BernsteinFunction& f);

MarginReport verify_nash(const Generator& gen, const RateFunction& B, const std::vector<Vec>& samples,
                         double slack = 1e-10);
MarginReport verify_nash(const Generator& gen, const RateFunction& B, const PhiFunctional& phi,
                         const SamplerConfig& cfg);

/// Fitted Nash rate with its diagnostics.
struct FittedRate {
  RateFunction rate;
  std::vector<double> grid;   // grid points kept
  std::vector<double> raw;    // per-point estimates before the envelope
  std::vector<std::string> warnings;
  double x_sup = 0.0;         // sup ||u||^2 / Phi(u) over the sector
  bool x_sup_exact = false;
  double floor = 0.0;         // value below the first grid point
};

/// Sector vertices of {Phi = 1} for Phi = l1^2 when ker A* has dimension <= 1:
/// these carry the extreme ratios ||u||^2 / ||u||_1^2.
std::vector<Vec> sector_vertices(const Generator& gen);

/// Largest increasing step function below the sampled Rayleigh quotients:
/// B(x_k) = inf{<Au,u>/||u||^2 : u in sector, Phi(u) = 1, ||u||^2 >= x_k}.
/// An empty grid asks for 24 log-spaced points up to x_sup.
FittedRate fit_B(const Generator& gen, const PhiFunctional& phi, std::vector<double> x_grid,
                 const SamplerConfig& cfg);

/// Computes <f(A)u,u> spectrally (symmetric) or by Phillips (otherwise).
class SubordinateEnergy {
public:
  SubordinateEnergy(const Generator& gen, const BernsteinFunction& f, bool force_phillips = false);
  double operator()(const Vec& u) const { return space_.inner(K_ * u, u); }
  const Mat& matrix() const { return K_; }
  bool used_phillips() const { return phillips_; }

private:
  WeightedSpace space_{1};
  Mat K_;
  bool phillips_ = false;
};

/// Theorem check: <f(A)u,u> >= subordinate_nash_bound(||u||^2). Throws
/// HypothesisError when the Nash inequality for A fails on the samples.
MarginReport verify_theorem(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                            const std::vector<Vec>& samples, NashVariant variant,
                            double slack = 1e-8);
MarginReport verify_theorem(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                            const PhiFunctional& phi, NashVariant variant, const SamplerConfig& cfg);

struct DecayEquivalence {
  MarginReport forward;   // decay_bound(x, t) - ||T_t u||^2
  MarginReport converse;  // (||u||^2 - ||T_h u||^2)/(2h) - x B(x)
};

DecayEquivalence verify_decay_equivalence(const Generator& gen, const RateFunction& B,
                                          const std::vector<Vec>& samples,
                                          const std::vector<double>& t_grid);
DecayEquivalence verify_decay_equivalence(const Generator& gen, const RateFunction& B,
                                          const PhiFunctional& phi, const SamplerConfig& cfg,
                                          const std::vector<double>& t_grid);

/// g(r) = int_0^r nu(2(G(r) - G(u)), inf) du.
double g_integral(double r, const DecayProfile& profile, const LevyMeasure& nu);

/// (r/2) f(B(r/2)) <= g(r) <= (e/(e-1)) r f(B(r)); requires a = b = 0.
BoundReport check_g_sandwich(const std::vector<double>& r_grid, const DecayProfile& profile,
                             const BernsteinFunction& f, double rel_tol = 1e-6);

/// 1/(2rB(r)) <= (G(r) - G(u))/(r - u) <= 1/(2uB(u)) on the given pairs.
BoundReport check_mean_value(const DecayProfile& profile,
                             const std::vector<std::pair<double, double>>& pairs,
                             double rel_tol = 1e-9);

}  // namespace subcal
