#include "subcal/phillips.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "subcal/rng.hpp"

namespace subcal {

Mat expm_neg(const Mat& A, double s) {
  if (s == 0.0) return Mat::Identity(A.rows(), A.cols());
  Mat X = -s * A;
  return X.exp();
}

namespace {

// I - e^{-sA}; Taylor series when s||A|| is small to avoid cancellation.
Mat one_minus_semigroup(const Mat& A, double s, double anorm) {
  const auto n = A.rows();
  if (s * anorm <= 0.5) {
    Mat term = s * A;
    Mat sum = term;
    for (int k = 2; k < 40; ++k) {
      term = term * (-s) * A / static_cast<double>(k);
      sum += term;
      if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    return sum;
  }
  return Mat::Identity(n, n) - expm_neg(A, s);
}

}  // namespace

PhillipsOperator::PhillipsOperator(const Generator& gen, const BernsteinFunction& f,
                                   PhillipsOptions opts)
    : space_(gen.space()) {
  if (!f.has_triplet()) throw DomainError("Phillips formula needs a Levy triplet");
  const Mat& A = gen.matrix();
  const auto n = A.rows();
  const Mat I = Mat::Identity(n, n);
  K_ = f.a() * I + f.b() * A;
  const LevyMeasure& nu = f.nu();
  const double anorm = gen.norm_inf();
  split_ = anorm > 0.0 ? 1.0 / anorm : 1.0;
  const Mat zero = Mat::Zero(n, n);

  auto count = [&](std::size_t k) {
    evaluations_ += k;
    if (evaluations_ > opts.max_evaluations) {
      throw QuadratureError("Phillips quadrature exceeded its evaluation budget",
                            K_.cwiseAbs().maxCoeff(), error_);
    }
  };

  switch (nu.kind()) {
    case LevyMeasure::Kind::zero:
      return;
    case LevyMeasure::Kind::atoms:
      for (const auto& [s, w] : nu.points()) {
        K_ += w * one_minus_semigroup(A, s, anorm);
        count(1);
      }
      return;
    case LevyMeasure::Kind::density:
    case LevyMeasure::Kind::tail_only:
      break;
  }

  const bool by_parts = nu.kind() == LevyMeasure::Kind::tail_only;
  quad::Options qo;
  qo.abs_tol = opts.abs_tol;
  qo.rel_tol = opts.rel_tol;
  qo.max_evaluations = opts.max_evaluations;

  // For tail-only measures: int (I - T_s) nu(ds) = int A T_s nu(s, inf) ds.
  auto integrand = [&](double s) -> Mat {
    if (by_parts) return A * expm_neg(A, s) * nu.tail(s);
    return one_minus_semigroup(A, s, anorm) * nu.density_at(s);
  };

  // (0, s*] in t = s* e^{-v}
  auto lower = quad::from_zero<Mat>(integrand, split_, zero, qo);
  K_ += lower.value;
  error_ += lower.error;
  count(lower.evaluations);

  // [s*, inf) in doubling panels in s, stopping once T_s has equilibrated;
  // the rest is then (I - Pi) nu(S, inf) with Pi ~ T_S.
  auto in_log = [&](double v) -> Mat {
    const double s = std::exp(v);
    Mat val = integrand(s);
    val *= s;
    return val;
  };
  double lo = split_;
  Mat t_lo = expm_neg(A, lo);
  for (int panel = 0; panel < 2000; ++panel) {
    const double hi = 2.0 * lo;
    auto piece = quad::adaptive<Mat>(in_log, std::log(lo), std::log(hi), zero, qo);
    K_ += piece.value;
    error_ += piece.error;
    count(piece.evaluations + 1);
    Mat t_hi = expm_neg(A, hi);
    const double tail_hi = nu.tail(hi);
    // ||T_lo - Pi|| is estimated by ||T_hi - T_lo||; the remaining integral of
    // (T_S - T_s) nu(ds) is below that times nu(S, inf).
    const double drift = (t_hi - t_lo).cwiseAbs().maxCoeff();
    const double target = std::max(qo.abs_tol, qo.rel_tol * K_.cwiseAbs().maxCoeff());
    if (drift <= 1e-12 && drift * nu.tail(lo) <= target) {
      if (by_parts) {
        // int_S^inf A T_s tail(s) ds with A T_s ~ A Pi = 0 at equilibrium
        error_ += (A * t_hi).cwiseAbs().maxCoeff() * tail_hi * hi;
      } else {
        K_ += (I - t_hi) * tail_hi;
      }
      return;
    }
    const double negligible = std::max(qo.abs_tol, qo.rel_tol * K_.cwiseAbs().maxCoeff()) * 1e-3;
    if (tail_hi * 2.0 <= negligible && !by_parts) {
      error_ += tail_hi * 2.0;
      return;
    }
    lo = hi;
    t_lo = std::move(t_hi);
  }
  throw QuadratureError("Phillips tail did not settle", K_.cwiseAbs().maxCoeff(), error_);
}

PhillipsResult phillips_apply(const Generator& gen, const BernsteinFunction& f, const Vec& u) {
  if (!u.allFinite()) throw DomainError("Phillips formula needs a finite vector");
  PhillipsOperator op(gen, f);
  return PhillipsResult{op.apply(u), op.error() * u.cwiseAbs().sum()};
}

CrossValidation cross_validate(const Generator& gen, const BernsteinFunction& f, int trials,
                               std::uint64_t seed, double tol) {
  if (!gen.symmetric()) throw DomainError("cross validation needs a symmetric generator");
  PhillipsOperator op(gen, f);
  const Mat spectral = spectral_apply(gen, f).matrix();
  const auto& sp = gen.space();
  Rng rng(seed);
  CrossValidation out;
  const auto n = gen.matrix().rows();
  for (int k = 0; k < trials; ++k) {
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.normal();
    const double err = sp.norm2(op.apply(u) - spectral * u) / std::max(1.0, sp.norm2(u));
    if (k == 0 || err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_u = u;
    }
  }
  out.pass = out.max_rel_error <= tol;
  return out;
}

}  // namespace subcal
