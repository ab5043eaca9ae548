#pragma once

// Test-vector sampling on the slice Phi(u) = 1, with optional restriction to
// the sector range(A) (the m-orthogonal complement of ker A*).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subcal/operator.hpp"

namespace subcal {

class PhiFunctional {
public:
  using Fn = std::function<double(const Vec&)>;

  /// Phi(u) = ||u||_1^2.
  static PhiFunctional l1_squared(const WeightedSpace& space);
  /// Any 2-homogeneous functional that does not grow under T_t.
  static PhiFunctional custom(Fn fn, std::string name);

  double operator()(const Vec& u) const { return fn_(u); }
  const std::string& name() const { return name_; }
  bool is_l1_squared() const { return l1_; }
  /// u / sqrt(Phi(u)); throws DegenerateError when Phi(u) = 0.
  Vec normalize(const Vec& u) const;

private:
  Fn fn_;
  std::string name_;
  bool l1_ = false;
};

struct SamplerConfig {
  std::size_t count = 500;
  std::uint64_t seed = 1;
  bool exclude_kernel = true;
  double kernel_tol = 1e-8;
};

/// Signed Dirichlet-like draws: |u_i| = E_i^p with E_i exponential and
/// p cycling through {1/2, 1, 2, 4}; every third draw is sparsified. With
/// exclude_kernel, draws are projected to the sector and rejected when the
/// projection keeps less than kernel_tol of the norm. All outputs have
/// Phi(u) = 1.
std::vector<Vec> draw_samples(const Generator& gen, const PhiFunctional& phi,
                              const SamplerConfig& cfg);

/// Coordinate hill-climb: maximises obj over vectors of the form
/// normalize(project(u + d e_i)). Step sizes shrink geometrically.
struct SearchResult {
  Vec u;
  double value = 0.0;
};
SearchResult local_search(const Vec& start, const std::function<double(const Vec&)>& obj,
                          const std::function<Vec(const Vec&)>& project, const PhiFunctional& phi,
                          int sweeps = 30, double step = 0.5);

}  // namespace subcal
