#pragma once

// The eta integral, on-diagonal bounds for subordinate semigroups, the
// contractivity classification and decay inheritance.

#include <optional>
#include <string>
#include <vector>

#include "subcal/bernstein.hpp"
#include "subcal/operator.hpp"
#include "subcal/rate.hpp"
#include "subcal/report.hpp"
#include "subcal/sampling.hpp"

namespace subcal {

/// eta(t) = int_t^inf du / (u f(B(u))) (nash) or int_t^inf ds / (s f(s)) (plain).
class EtaProfile {
public:
  enum class Kind { nash, plain };

  static EtaProfile nash(BernsteinFunction f, RateFunction B);
  static EtaProfile plain(BernsteinFunction f);

  Kind kind() const { return kind_; }
  /// +inf when the tail cannot be certified to converge.
  double eta(double t) const;
  /// inf{t > 0 : eta(t) <= y}; 0 when eta stays below y.
  double inverse(double y) const;
  bool finite() const { return std::isfinite(eta(1.0)); }

private:
  EtaProfile(Kind kind, BernsteinFunction f, std::optional<RateFunction> B);
  double h(double u) const;  // f(B(u)) or f(u)

  Kind kind_;
  BernsteinFunction f_;
  std::optional<RateFunction> B_;
  std::vector<double> breaks_;
};

/// 2 eta^{-1}(t/2); +inf when t/2 is above sup eta or eta diverges.
double ondiag_bound(const EtaProfile& profile, double t);

struct OndiagReport {
  BoundReport bound;        // x = t, value = ||T_t^f - Pi||_{1->inf}, upper = ondiag_bound
  MarginReport hypothesis;  // Nash for (A, B) on the sector
  bool asserted = false;    // false: curves only
  std::vector<Curve> curves;
};

/// Measured ||T_t^f - Pi||_{1->inf} against 2 eta^{-1}(t/2) on the sector
/// where the Nash hypothesis is certified. Without the hypothesis, or with a
/// divergent eta, only the curves are reported.
OndiagReport verify_ondiag(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                           const PhiFunctional& phi, const SamplerConfig& cfg, const std::vector<double>& t_grid);

struct Classification {
  std::string family;
  double delta = 0.0;
  double integral = 0.0;      // int_1^inf dr / f(r^delta), +inf if divergent
  double limit = 0.0;         // estimate of lim f^{-1}(l) / l^delta
  std::string limit_kind;     // zero | finite | infinite | indeterminate
  std::vector<double> lambdas;
  std::vector<double> ratios;  // f^{-1}(l) / l^delta on the grid
  std::vector<std::string> labels;
  bool has(const std::string& label) const;
};

/// ultra when the integral test passes; super, hyper or not_hyper from the
/// limit L = 0, in (0, inf) or inf; indeterminate when the limit does not
/// settle. The limit is taken in lambda -> inf.
Classification classify_contractivity(const BernsteinFunction& f, double delta);
std::string classification_csv(const std::vector<Classification>& rows);

struct DecayInheritance {
  MarginReport hypothesis;   // c0 Phi(u) / t^delta - ||T_t u||^2
  std::vector<double> t_grid;
  std::vector<double> ratio;  // sup_u ||T_t^f u||^2 / ([eta^{-1}(t)]^delta Phi(u))
  double c1 = 0.0;            // max of the ratio: the empirical constant with c2 = 1
  double median = 0.0;
  bool pass = false;          // max <= 1e3 * median
};

/// Empirical c0 = max ||T_t u||^2 t^delta / Phi(u) on the samples and grid.
double fit_decay_constant(const Generator& gen, const PhiFunctional& phi, double delta,
                          const std::vector<double>& t_grid, const SamplerConfig& cfg);

/// Throws HypothesisError when the decay hypothesis fails on the samples or
/// the plain eta diverges.
DecayInheritance subordinate_decay_check(const Generator& gen, const BernsteinFunction& f, const PhiFunctional& phi,
                                         double delta, double c0, const std::vector<double>& t_grid,
                                         const SamplerConfig& cfg);

}  // namespace subcal
