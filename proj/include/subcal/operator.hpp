#pragma once

// Finite weighted state spaces, generator matrices and their semigroups.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subcal/bernstein.hpp"

namespace subcal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class WeightedSpace {
public:
  explicit WeightedSpace(std::size_t n);
  explicit WeightedSpace(Vec m);

  std::size_t n() const { return static_cast<std::size_t>(m_.size()); }
  const Vec& m() const { return m_; }
  double total_mass() const { return m_.sum(); }

  double norm1(const Vec& u) const { return (u.cwiseAbs().array() * m_.array()).sum(); }
  double norm2_sq(const Vec& u) const { return (u.array().square() * m_.array()).sum(); }
  double norm2(const Vec& u) const { return std::sqrt(norm2_sq(u)); }
  double norm_inf(const Vec& u) const { return u.cwiseAbs().maxCoeff(); }
  double inner(const Vec& u, const Vec& v) const { return (u.array() * v.array() * m_.array()).sum(); }

private:
  Vec m_;
};

class Generator {
public:
  /// Validates sign pattern, row sums (sub-Markov) and m-weighted column sums
  /// (L1 contraction). `validate = false` skips this for derived generators.
  static Generator from_matrix(Mat A, WeightedSpace space, std::string name = "matrix",
                               bool validate = true);

  static Generator path_laplacian(std::size_t n);
  static Generator cycle_laplacian(std::size_t n);
  static Generator complete_laplacian(std::size_t n);
  /// births[i] is the rate i -> i+1, deaths[i] the rate i+1 -> i. Without `m`
  /// the reversing measure is built from detailed balance.
  static Generator birth_death(const std::vector<double>& births, const std::vector<double>& deaths,
                               std::optional<Vec> m = std::nullopt);
  /// A = I - P, P a random non-symmetric mixture of permutation matrices.
  static Generator doubly_stochastic_nonsym(std::size_t n, std::uint64_t seed);

  const Mat& matrix() const { return A_; }
  const WeightedSpace& space() const { return space_; }
  std::size_t n() const { return space_.n(); }
  bool symmetric() const { return symmetric_; }
  const std::string& name() const { return name_; }
  double norm_inf() const;  // max row sum of |A|

  /// Ascending eigenvalues and m-orthonormal eigenvectors (symmetric only).
  const Vec& eigenvalues() const;
  const Mat& eigenvectors() const;

  /// T_t = e^{-tA}; exact identity at t = 0.
  Mat semigroup(double t) const;
  Vec apply_semigroup(double t, const Vec& u) const { return semigroup(t) * u; }
  /// <Au, u> (the real part, vectors being real).
  double energy(const Vec& u) const;
  /// g(A) = V g(Lambda) V^T M for symmetric generators.
  Mat spectral_matrix(const std::function<double(double)>& g) const;

  /// m-orthonormal basis of ker A.
  const Mat& kernel() const { return kernel_; }
  /// m-orthonormal basis of ker A*, the m-orthogonal complement of range A.
  const Mat& left_kernel() const { return left_kernel_; }
  /// m-orthogonal projection onto range A.
  Vec project_to_sector(const Vec& u) const;
  /// Stationary projection Pi = lim T_t restricted to the kernel directions.
  Mat equilibrium_projection() const;

  std::string matrix_csv() const;

private:
  Mat A_;
  WeightedSpace space_{1};
  std::string name_;
  bool symmetric_ = false;
  Vec evals_;
  Mat evecs_;
  Mat kernel_;
  Mat left_kernel_;

  void analyse();
  void set_spectral_kernel();

  friend Generator spectral_apply(const Generator& gen, const BernsteinFunction& f);
};

/// The subordinate generator f(A) of a symmetric generator, by spectral calculus.
Generator spectral_apply(const Generator& gen, const BernsteinFunction& f);

/// max_{x,y} |K_xy| / m_y: the L1 -> Linf norm of a kernel operator.
double norm_1_to_inf(const Mat& T, const WeightedSpace& space);
double norm_1_to_inf(const Generator& gen, double t);

}  // namespace subcal
