#include "subcal/operator.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "subcal/rng.hpp"

namespace subcal {

namespace {

// Euclidean null space of B via SVD, then m-orthonormalised.
Mat null_space(const Mat& B, const Vec& m, double tol) {
  const Eigen::Index n = B.cols();
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double si = i < s.size() ? s(i) : 0.0;
    if (si <= tol) idx.push_back(i);
  }
  Mat K(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) K.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(idx[j]);
  if (K.cols() == 0) return K;
  Mat G = K.transpose() * m.asDiagonal() * K;
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  Mat inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                 es.eigenvectors().transpose();
  return K * inv_sqrt;
}

}  // namespace

// WeightedSpace -----------------------------------------------------------------

WeightedSpace::WeightedSpace(std::size_t n) : m_(Vec::Ones(static_cast<Eigen::Index>(n))) {
  if (n == 0) throw DomainError("state space must be nonempty");
}

WeightedSpace::WeightedSpace(Vec m) : m_(std::move(m)) {
  if (m_.size() == 0) throw DomainError("state space must be nonempty");
  for (Eigen::Index i = 0; i < m_.size(); ++i) {
    if (!(m_(i) > 0.0) || !std::isfinite(m_(i))) throw DomainError("weights must be positive and finite");
  }
}

// Generator ------------------------------------------------------------------------

Generator Generator::from_matrix(Mat A, WeightedSpace space, std::string name, bool validate) {
  if (A.rows() != A.cols() || static_cast<std::size_t>(A.rows()) != space.n()) {
    throw DomainError("generator matrix must be square and match the state space");
  }
  if (!A.allFinite()) throw DomainError("generator matrix has non-finite entries");
  if (validate) {
    const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff());
    const Vec& m = space.m();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        if (i != j && A(i, j) > tol) {
          throw DomainError("generator off-diagonal entries must be <= 0 (positivity of T_t)");
        }
      }
      if (A.row(i).sum() < -tol) throw DomainError("generator row sums must be >= 0 (Linf contraction)");
      const double col = (m.array() * A.col(i).array()).sum();
      if (col < -tol * m(i) * static_cast<double>(A.rows())) {
        throw DomainError("m-weighted column sums must be >= 0 (L1 contraction)");
      }
    }
  }
  Generator g;
  g.A_ = std::move(A);
  g.space_ = std::move(space);
  g.name_ = std::move(name);
  g.analyse();
  return g;
}

void Generator::analyse() {
  const Vec& m = space_.m();
  const Mat MA = m.asDiagonal() * A_;
  const double scale = std::max(1.0, MA.cwiseAbs().maxCoeff());
  symmetric_ = (MA - MA.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  const double anorm = std::max(1.0, norm_inf());
  const double ktol = 1e-10 * anorm;
  if (symmetric_) {
    const Vec sq = m.cwiseSqrt();
    const Vec isq = sq.cwiseInverse();
    Mat S = isq.asDiagonal() * MA * isq.asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    if (es.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
    evals_ = es.eigenvalues();
    evecs_ = isq.asDiagonal() * es.eigenvectors();
    const Mat resid = A_ * evecs_ - evecs_ * evals_.asDiagonal();
    const double rmax = (sq.asDiagonal() * resid).cwiseAbs().maxCoeff();
    if (rmax > 1e-12 * anorm * std::sqrt(static_cast<double>(n()))) {
      throw Error("eigensystem residual too large: " + format_double(rmax));
    }
    for (Eigen::Index i = 0; i < evals_.size(); ++i) {
      if (evals_(i) < -1e-12 * anorm) throw DomainError("symmetric generator has a negative eigenvalue");
      // Rounding leaves kernel eigenvalues near 1e-16; non-smooth f such as
      // l^alpha would amplify that, so they are snapped to 0.
      if (evals_(i) <= ktol) evals_(i) = 0.0;
    }
    set_spectral_kernel();
  } else {
    kernel_ = null_space(A_, m, ktol);
    // ker A* with A* = M^{-1} A^T M, i.e. A^T M v = 0.
    left_kernel_ = null_space(A_.transpose() * m.asDiagonal(), m, ktol);
  }
}

void Generator::set_spectral_kernel() {
  const double ktol = 1e-10 * std::max(1.0, norm_inf());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < evals_.size(); ++i) {
    if (evals_(i) <= ktol) idx.push_back(i);
  }
  kernel_.resize(A_.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) kernel_.col(static_cast<Eigen::Index>(j)) = evecs_.col(idx[j]);
  left_kernel_ = kernel_;
}

double Generator::norm_inf() const { return A_.cwiseAbs().rowwise().sum().maxCoeff(); }

const Vec& Generator::eigenvalues() const {
  if (!symmetric_) throw DomainError("eigensystem is only kept for symmetric generators");
  return evals_;
}

const Mat& Generator::eigenvectors() const {
  if (!symmetric_) throw DomainError("eigensystem is only kept for symmetric generators");
  return evecs_;
}

Mat Generator::semigroup(double t) const {
  if (!(t >= 0.0)) throw DomainError("semigroup time must be nonnegative");
  const auto nn = A_.rows();
  if (t == 0.0) return Mat::Identity(nn, nn);
  if (std::isinf(t)) return equilibrium_projection();
  if (symmetric_) {
    return spectral_matrix([t](double l) { return std::exp(-t * l); });
  }
  Mat X = -t * A_;
  return X.exp();
}

double Generator::energy(const Vec& u) const { return space_.inner(A_ * u, u); }

Mat Generator::spectral_matrix(const std::function<double(double)>& g) const {
  if (!symmetric_) throw DomainError("spectral calculus needs a symmetric generator; use the Phillips route");
  Vec gl(evals_.size());
  for (Eigen::Index i = 0; i < evals_.size(); ++i) gl(i) = g(evals_(i));
  return evecs_ * gl.asDiagonal() * evecs_.transpose() * space_.m().asDiagonal();
}

Vec Generator::project_to_sector(const Vec& u) const {
  if (left_kernel_.cols() == 0) return u;
  const Vec c = left_kernel_.transpose() * (space_.m().asDiagonal() * u);
  return u - left_kernel_ * c;
}

Mat Generator::equilibrium_projection() const {
  // Pi = sum over kernel pairs; for symmetric A, K K^T M. For non-symmetric
  // A, Pi = K (L^T M K)^{-1} L^T M with right kernel K and left kernel L.
  const Mat& K = kernel_;
  const auto nn = A_.rows();
  if (K.cols() == 0) return Mat::Zero(nn, nn);
  const Mat M = space_.m().asDiagonal();
  if (symmetric_) return K * K.transpose() * M;
  const Mat& L = left_kernel_;
  if (L.cols() != K.cols()) throw DegenerateError("kernel and left kernel dimensions differ");
  return K * (L.transpose() * M * K).inverse() * L.transpose() * M;
}

std::string Generator::matrix_csv() const {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    for (Eigen::Index j = 0; j < A_.cols(); ++j) {
      if (j) os << ',';
      os << format_double(A_(i, j));
    }
    os << '\n';
  }
  return os.str();
}

Generator Generator::path_laplacian(std::size_t n) {
  if (n < 1) throw DomainError("path needs at least one vertex");
  const auto nn = static_cast<Eigen::Index>(n);
  Mat A = Mat::Zero(nn, nn);
  for (Eigen::Index i = 0; i + 1 < nn; ++i) {
    A(i, i + 1) -= 1.0;
    A(i + 1, i) -= 1.0;
    A(i, i) += 1.0;
    A(i + 1, i + 1) += 1.0;
  }
  return from_matrix(std::move(A), WeightedSpace(n), "path_laplacian(" + std::to_string(n) + ")");
}

Generator Generator::cycle_laplacian(std::size_t n) {
  if (n < 3) throw DomainError("cycle needs at least three vertices");
  const auto nn = static_cast<Eigen::Index>(n);
  Mat A = 2.0 * Mat::Identity(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    A(i, (i + 1) % nn) -= 1.0;
    A((i + 1) % nn, i) -= 1.0;
  }
  return from_matrix(std::move(A), WeightedSpace(n), "cycle_laplacian(" + std::to_string(n) + ")");
}

Generator Generator::complete_laplacian(std::size_t n) {
  if (n < 1) throw DomainError("complete graph needs at least one vertex");
  const auto nn = static_cast<Eigen::Index>(n);
  Mat A = Mat::Identity(nn, nn) - Mat::Constant(nn, nn, 1.0 / static_cast<double>(n));
  return from_matrix(std::move(A), WeightedSpace(n), "complete_laplacian(" + std::to_string(n) + ")");
}

Generator Generator::birth_death(const std::vector<double>& births, const std::vector<double>& deaths,
                                 std::optional<Vec> m) {
  if (births.size() != deaths.size()) throw DomainError("births and deaths must have equal length");
  const std::size_t n = births.size() + 1;
  const auto nn = static_cast<Eigen::Index>(n);
  Mat A = Mat::Zero(nn, nn);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double b = births[i];
    const double d = deaths[i];
    if (!(b >= 0.0) || !(d >= 0.0) || !std::isfinite(b) || !std::isfinite(d)) {
      throw DomainError("birth and death rates must be finite and nonnegative");
    }
    const auto k = static_cast<Eigen::Index>(i);
    A(k, k + 1) = -b;
    A(k, k) += b;
    A(k + 1, k) = -d;
    A(k + 1, k + 1) += d;
  }
  Vec w(nn);
  if (m) {
    w = *m;
  } else {
    w(0) = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double b = births[i];
      const double d = deaths[i];
      if (b == 0.0 && d == 0.0) {
        w(k + 1) = 1.0;  // disconnected: start a new component
      } else if (b > 0.0 && d > 0.0) {
        w(k + 1) = w(k) * b / d;
      } else {
        throw DomainError("one-way rates admit no reversing measure; pass m explicitly");
      }
    }
  }
  return from_matrix(std::move(A), WeightedSpace(std::move(w)), "birth_death(" + std::to_string(n) + ")");
}

Generator Generator::doubly_stochastic_nonsym(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw DomainError("non-symmetric doubly stochastic kernels need n >= 3");
  const auto nn = static_cast<Eigen::Index>(n);
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Mat P = Mat::Zero(nn, nn);
    std::vector<double> w(3);
    double total = 0.0;
    for (auto& x : w) {
      x = -std::log(rng.uniform_open0());
      total += x;
    }
    for (int k = 0; k < 3; ++k) {
      std::vector<std::size_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = k == 0 ? (i + 1) % n : i;
      if (k > 0) rng.shuffle(perm);
      for (std::size_t i = 0; i < n; ++i) {
        P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) += w[static_cast<std::size_t>(k)] / total;
      }
    }
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-3) {
      Mat A = Mat::Identity(nn, nn) - P;
      return from_matrix(std::move(A), WeightedSpace(n),
                         "doubly_stochastic_nonsym(" + std::to_string(n) + "," + std::to_string(seed) + ")");
    }
  }
  throw Error("could not draw a non-symmetric doubly stochastic matrix");
}

// Free functions --------------------------------------------------------------------

Generator spectral_apply(const Generator& gen, const BernsteinFunction& f) {
  if (!gen.symmetric()) {
    throw DomainError("spectral_apply needs a symmetric generator; use phillips for " + gen.name());
  }
  Generator out;
  out.space_ = gen.space_;
  out.name_ = f.family() + "(" + gen.name() + ")";
  out.symmetric_ = true;
  out.evecs_ = gen.evecs_;
  out.evals_.resize(gen.evals_.size());
  for (Eigen::Index i = 0; i < gen.evals_.size(); ++i) out.evals_(i) = f.eval(gen.evals_(i));
  out.A_ = out.evecs_ * out.evals_.asDiagonal() * out.evecs_.transpose() * out.space_.m().asDiagonal();
  out.set_spectral_kernel();
  return out;
}

double norm_1_to_inf(const Mat& T, const WeightedSpace& space) {
  return (T.cwiseAbs().array().rowwise() / space.m().transpose().array()).maxCoeff();
}

double norm_1_to_inf(const Generator& gen, double t) {
  if (!(t > 0.0)) throw DomainError("norm_1_to_inf needs t > 0");
  return norm_1_to_inf(gen.semigroup(t), gen.space());
}

}  // namespace subcal
