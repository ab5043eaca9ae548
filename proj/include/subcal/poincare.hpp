#pragma once

// Super-Poincare ||u||^2 <= r<Au,u> + beta(r)Phi(u) and weak Poincare
// ||u||^2 <= alpha(r)<Au,u> + r Phi(u) inequalities: fits, subordinate
// transforms, the intermediate Theta functions and the converses.

#include <functional>
#include <string>
#include <vector>

#include "subcal/bernstein.hpp"
#include "subcal/operator.hpp"
#include "subcal/rate.hpp"
#include "subcal/report.hpp"
#include "subcal/sampling.hpp"

namespace subcal {

/// B(x) = sup_{s>0} (1 - beta(s)/x)/s for decreasing beta with beta(0+) = inf
/// and beta(inf) = 0. The sup is a grid sup over [beta^{-1}(x), 2 beta^{-1}(x/2)]
/// and is checked against 1/(2 beta^{-1}(x/2)) <= B(x) <= 1/beta^{-1}(x).
double beta_to_B(const RateFunction& beta, double x);

/// 4 beta(1/(2 f^{-1}(2/r))); when 2/r is out of reach of a bounded f the
/// argument is 0 and beta(0+) is used.
double subordinate_beta(const RateFunction& beta, const BernsteinFunction& f, double r);

/// 2 / f(1/(2 alpha(r/4))); +inf when alpha(r/4) is infinite.
double subordinate_alpha(const RateFunction& alpha, const BernsteinFunction& f, double r);

/// 2 beta_f(1/(2 f(1/r))); f(1/r) = 0 sends the argument to +inf.
double converse_beta(const RateFunction& beta_f, const BernsteinFunction& f, double r);

/// Subordinate rate as a RateFunction, for feeding the verifiers.
RateFunction subordinate_beta_rate(const RateFunction& beta, const BernsteinFunction& f);
RateFunction subordinate_alpha_rate(const RateFunction& alpha, const BernsteinFunction& f);

using EnergyFn = std::function<double(const Vec&)>;

/// Margins r<Au,u> + beta(r)Phi(u) - ||u||^2 over samples x r-grid
/// (param = r). The default sample set has no kernel exclusion and includes
/// the kernel basis.
MarginReport verify_super_poincare(const WeightedSpace& space, const EnergyFn& energy,
                                   const RateFunction& beta, const PhiFunctional& phi,
                                   const std::vector<Vec>& samples, const std::vector<double>& r_grid,
                                   double slack = 1e-10);
MarginReport verify_super_poincare(const Generator& gen, const RateFunction& beta, const PhiFunctional& phi,
                                   const SamplerConfig& cfg, const std::vector<double>& r_grid);

/// Margins alpha(r)<Au,u> + r Phi(u) - ||u||^2. An infinite alpha times a
/// numerically vanishing energy counts as 0.
MarginReport verify_weak_poincare(const WeightedSpace& space, const EnergyFn& energy,
                                  const RateFunction& alpha, const PhiFunctional& phi,
                                  const std::vector<Vec>& samples, const std::vector<double>& r_grid,
                                  double slack = 1e-10);
MarginReport verify_weak_poincare(const Generator& gen, const RateFunction& alpha, const PhiFunctional& phi,
                                  const SamplerConfig& cfg, const std::vector<double>& r_grid);

/// Verification set: samples without kernel exclusion plus the normalized
/// kernel basis.
std::vector<Vec> poincare_samples(const Generator& gen, const PhiFunctional& phi, const SamplerConfig& cfg);

struct FittedPoincare {
  RateFunction rate;
  std::vector<double> grid;
  std::vector<double> raw;  // per-point estimates before the envelope
  std::vector<std::string> warnings;
  double r_min = 0.0;       // weak Poincare: sup of ||u||^2 over the kernel slice
  double at_zero = 0.0;
};

/// beta(r) = sup_{Phi(u)=1} (||u||^2 - r<Au,u>) on the grid, as a
/// right-continuous nonincreasing step. An empty grid asks for 31 log points
/// with r ||A|| in [1e-3, 1e3].
FittedPoincare fit_beta(const Generator& gen, const PhiFunctional& phi, std::vector<double> r_grid,
                        const SamplerConfig& cfg);

/// alpha(r) = sup_{Phi(u)=1, <Au,u> > 0} (||u||^2 - r)/<Au,u> on a grid above
/// r_min; +inf below the first grid point.
FittedPoincare fit_alpha(const Generator& gen, const PhiFunctional& phi, std::vector<double> r_grid,
                         const SamplerConfig& cfg);

/// Theta and Theta_0 from the subordination proofs, with their conjugates.
class ThetaTransform {
public:
  /// Theta(x) = (x/2) sup_s f((1 - 2beta(s)/x)/s), Theta_0(x) = (x/2) f(1/(2 beta^{-1}(x/4))).
  static ThetaTransform super(RateFunction beta, BernsteinFunction f);
  /// Theta(x) = (x/2) sup_s f((1 - 2s/x)/alpha(s)), Theta_0(x) = (x/2) f(1/(2 alpha(x/4))).
  static ThetaTransform weak(RateFunction alpha, BernsteinFunction f);

  double theta(double x) const;
  double theta0(double x) const;
  double theta0_inverse(double y) const;
  /// sup_s {Theta^{-1}(s) - r s}, computed as sup_x {x - r Theta(x)}.
  double beta_tilde(double r) const;
  /// sup_s {(Theta_0^{-1}(s) - r)/s}, computed as sup_{x > r} (x - r)/Theta_0(x).
  double alpha_tilde(double r) const;

private:
  enum class Kind { super, weak };
  ThetaTransform(Kind kind, RateFunction rate, BernsteinFunction f);
  Kind kind_;
  RateFunction rate_;
  BernsteinFunction f_;
};

/// Jensen step f^{-1}(sum f(l_i) w_i) <= sum l_i w_i for probability weights.
struct JensenStep {
  double lhs;  // f^{-1}(sum f(l_i) w_i)
  double rhs;  // sum l_i w_i
};
JensenStep jensen_step(const BernsteinFunction& f, const Vec& lambdas, const Vec& weights);

struct ConverseNash {
  MarginReport f_level;  // <f(A)u,u> - x f(B(x))
  MarginReport a_level;  // <Au,u> - x B(x)
  MarginReport jensen;   // sum l_i w_i - f^{-1}(sum f(l_i) w_i), spectral weights of u
};

/// Given the f-level Nash inequality on the samples, checks the A-level one.
/// Throws HypothesisError when the f-level check fails.
ConverseNash converse_nash_jensen(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                                  const std::vector<Vec>& samples);
ConverseNash converse_nash_jensen(const Generator& gen, const BernsteinFunction& f, const RateFunction& B,
                                  const PhiFunctional& phi, const SamplerConfig& cfg);

}  // namespace subcal
