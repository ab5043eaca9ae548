#include "subcal/sampling.hpp"

#include <cmath>

#include "subcal/rng.hpp"

namespace subcal {

PhiFunctional PhiFunctional::l1_squared(const WeightedSpace& space) {
  PhiFunctional p;
  p.fn_ = [space](const Vec& u) {
    const double a = space.norm1(u);
    return a * a;
  };
  p.name_ = "l1_squared";
  p.l1_ = true;
  return p;
}

PhiFunctional PhiFunctional::custom(Fn fn, std::string name) {
  if (!fn) throw DomainError("functional callable is empty");
  PhiFunctional p;
  p.fn_ = std::move(fn);
  p.name_ = std::move(name);
  return p;
}

Vec PhiFunctional::normalize(const Vec& u) const {
  const double v = fn_(u);
  if (!(v > 0.0) || !std::isfinite(v)) throw DegenerateError("cannot normalise: Phi(u) = 0");
  return u / std::sqrt(v);
}

std::vector<Vec> draw_samples(const Generator& gen, const PhiFunctional& phi,
                              const SamplerConfig& cfg) {
  static constexpr double kPowers[] = {0.5, 1.0, 2.0, 4.0};
  const auto n = static_cast<Eigen::Index>(gen.n());
  const auto& sp = gen.space();
  Rng rng(cfg.seed);
  std::vector<Vec> out;
  out.reserve(cfg.count);
  std::size_t attempts = 0;
  while (out.size() < cfg.count) {
    if (++attempts > 100 * cfg.count + 1000) {
      throw DegenerateError("sampler cannot leave the kernel of the generator");
    }
    const double p = kPowers[attempts % 4];
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mag = std::pow(-std::log(rng.uniform_open0()), p);
      u(i) = rng.uniform() < 0.5 ? -mag : mag;
    }
    if (attempts % 3 == 0 && n > 2) {
      // keep a random support of size >= 2
      const auto keep = 2 + static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n - 1)));
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
      rng.shuffle(idx);
      for (auto k = keep; k < n; ++k) u(idx[static_cast<std::size_t>(k)]) = 0.0;
    }
    if (cfg.exclude_kernel) {
      const Vec pu = gen.project_to_sector(u);
      if (sp.norm2(pu) < cfg.kernel_tol * sp.norm2(u)) continue;
      u = pu;
    }
    const double ph = phi(u);
    if (!(ph > 0.0)) continue;
    out.push_back(u / std::sqrt(ph));
  }
  return out;
}

SearchResult local_search(const Vec& start, const std::function<double(const Vec&)>& obj,
                          const std::function<Vec(const Vec&)>& project, const PhiFunctional& phi,
                          int sweeps, double step) {
  SearchResult best{start, obj(start)};
  if (!std::isfinite(best.value)) best.value = -kInf;
  double d = step;
  const auto n = start.size();
  for (int s = 0; s < sweeps && d > 1e-7; ++s) {
    bool improved = false;
    const double scale = best.u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vec cand = best.u;
        cand(i) += sign * d * scale;
        cand = project(cand);
        const double ph = phi(cand);
        if (!(ph > 0.0) || !std::isfinite(ph)) continue;
        cand /= std::sqrt(ph);
        const double v = obj(cand);
        if (v > best.value) {
          best = SearchResult{std::move(cand), v};
          improved = true;
        }
      }
    }
    if (!improved) d *= 0.5;
  }
  return best;
}

}  // namespace subcal
