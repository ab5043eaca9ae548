#pragma once

// Subordinate generators by Phillips' formula
//   f(A) u = a u + b A u + int (u - T_s u) nu(ds),
// computed with matrix exponentials only (no eigendecomposition), so it serves
// both as the non-symmetric route and as an oracle for spectral calculus.

#include <cstdint>

#include "subcal/operator.hpp"

namespace subcal {

struct PhillipsOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  std::size_t max_evaluations = 20000;
};

class PhillipsOperator {
public:
  PhillipsOperator(const Generator& gen, const BernsteinFunction& f, PhillipsOptions opts = {});

  /// The matrix of f(A); immutable after construction.
  const Mat& matrix() const { return K_; }
  Vec apply(const Vec& u) const { return K_ * u; }
  /// Accumulated quadrature error estimate (max-entry scale).
  double error() const { return error_; }
  std::size_t evaluations() const { return evaluations_; }
  double split_point() const { return split_; }
  /// <f(A) u, u> in the m inner product.
  double energy(const Vec& u) const { return space_.inner(K_ * u, u); }

private:
  WeightedSpace space_{1};
  Mat K_;
  double error_ = 0.0;
  std::size_t evaluations_ = 0;
  double split_ = 1.0;
};

struct PhillipsResult {
  Vec value;
  double error = 0.0;
};

PhillipsResult phillips_apply(const Generator& gen, const BernsteinFunction& f, const Vec& u);

struct CrossValidation {
  double max_rel_error = 0.0;
  Vec worst_u;
  bool pass = true;
};

/// max over random u of ||Phillips(u) - spectral(u)||_2 / max(1, ||u||_2).
CrossValidation cross_validate(const Generator& gen, const BernsteinFunction& f, int trials,
                               std::uint64_t seed, double tol = 1e-6);

/// e^{-sA} by scaling and squaring (Pade), never through eigenvectors.
Mat expm_neg(const Mat& A, double s);

}  // namespace subcal
