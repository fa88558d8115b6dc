#pragma once

// Seeded synthetic instances with ground truth, plus evaluation metrics.
//
// Robust rotation search (pairs):   y = R* x + ε for inliers, x ~ N(0, I₃),
//   ε ~ N(0, σ²I₃); outlier pairs are independent N(0, I₃) draws, optionally
//   restricted to |‖y‖ − ‖x‖| ≤ 5.54σ so that a norm test cannot reject them.
// Correspondence search (clouds):   P ~ N(0, I₃)ⁿ; k points of Q are noisy
//   rotations of k points of P, the other m − k are fresh Gaussians.
// R* has a uniform axis on S² and a uniform angle in [0, 2π].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcs/geometry.hpp"
#include "arcs/matching.hpp"
#include "arcs/random.hpp"
#include "arcs/refine.hpp"

namespace arcs {

inline Point3 gaussian_point(Rng& rng) {
  const double a = rng.normal();
  const double b = rng.normal();
  const double c = rng.normal();
  return {a, b, c};
}

inline Point3 random_unit3(Rng& rng) {
  for (;;) {
    const Point3 v = gaussian_point(rng);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

inline RotationMatrix random_rotation(Rng& rng) {
  const Point3 axis = random_unit3(rng);
  return rodrigues(axis, rng.uniform(0.0, 2.0 * std::numbers::pi));
}

struct RrsInstance {
  PairList pairs;
  RotationMatrix r_true = RotationMatrix::Identity();
  /// Ascending.
  std::vector<std::size_t> inliers;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool norm_constrained = false;
};

/// Inlier positions are a seeded random subset of [0, ℓ). If `rotation` is
/// given it replaces the random R*.
inline RrsInstance gen_rrs(std::size_t l, std::size_t k, double sigma, std::uint64_t seed, bool norm_constrained,
                           const std::optional<RotationMatrix>& rotation = std::nullopt) {
  if (k < 1 || k > l) throw std::invalid_argument("gen_rrs: need 1 <= k <= l");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gen_rrs: sigma must be >= 0");
  if (rotation && !is_rotation(*rotation)) throw std::invalid_argument("gen_rrs: rotation is not a rotation");

  Rng rng(seed);
  RrsInstance inst;
  inst.sigma = sigma;
  inst.seed = seed;
  inst.norm_constrained = norm_constrained;
  inst.r_true = rotation ? *rotation : random_rotation(rng);

  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> inlier(l, false);
  for (std::size_t t = 0; t < k; ++t) inlier[order[t]] = true;

  const double c = kMatchSigmaFactor * sigma;
  inst.pairs.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    auto& pr = inst.pairs[i];
    if (inlier[i]) {
      pr.x = gaussian_point(rng);
      const Point3 eps = gaussian_point(rng);
      pr.y = inst.r_true * pr.x + sigma * eps;
      inst.inliers.push_back(i);
    } else if (!norm_constrained) {
      pr.y = gaussian_point(rng);
      pr.x = gaussian_point(rng);
    } else if (sigma == 0.0) {
      // Zero-width band: rejection would never terminate.
      pr.x = gaussian_point(rng);
      pr.y = pr.x.norm() * random_unit3(rng);
    } else {
      do {
        pr.y = gaussian_point(rng);
        pr.x = gaussian_point(rng);
      } while (std::abs(pr.y.norm() - pr.x.norm()) > c);
    }
  }
  return inst;
}

struct SrcsInstance {
  PointCloud q;
  PointCloud p;
  RotationMatrix r_true = RotationMatrix::Identity();
  /// Planted (i into Q, j into P), sorted.
  CorrespondenceSet truth;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline SrcsInstance gen_srcs(std::size_t m, std::size_t n, std::size_t k, double sigma, std::uint64_t seed,
                             const std::optional<RotationMatrix>& rotation = std::nullopt) {
  if (k > n || n > m) throw std::invalid_argument("gen_srcs: need k <= n <= m");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gen_srcs: sigma must be >= 0");
  if (rotation && !is_rotation(*rotation)) throw std::invalid_argument("gen_srcs: rotation is not a rotation");

  Rng rng(seed);
  SrcsInstance inst;
  inst.sigma = sigma;
  inst.seed = seed;
  inst.r_true = rotation ? *rotation : random_rotation(rng);

  std::vector<Point3> p(n);
  for (auto& pt : p) pt = gaussian_point(rng);
  std::vector<Point3> q(m);
  for (std::size_t t = 0; t < k; ++t) q[t] = inst.r_true * p[t] + sigma * gaussian_point(rng);
  for (std::size_t t = k; t < m; ++t) q[t] = gaussian_point(rng);

  // Slot t of the unshuffled lists moves to qpos[t] / ppos[t].
  std::vector<std::size_t> qpos(m);
  std::vector<std::size_t> ppos(n);
  std::iota(qpos.begin(), qpos.end(), std::size_t{0});
  std::iota(ppos.begin(), ppos.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(qpos));
  rng.shuffle(std::span<std::size_t>(ppos));

  std::vector<Point3> qs(m);
  std::vector<Point3> ps(n);
  for (std::size_t t = 0; t < m; ++t) qs[qpos[t]] = q[t];
  for (std::size_t t = 0; t < n; ++t) ps[ppos[t]] = p[t];
  for (std::size_t t = 0; t < k; ++t) inst.truth.push_back({qpos[t], ppos[t]});
  std::sort(inst.truth.begin(), inst.truth.end());

  inst.q = PointCloud(std::move(qs));
  inst.p = PointCloud(std::move(ps));
  return inst;
}

/// Fraction of errors strictly below the threshold (degrees).
inline double success_rate(std::span<const double> errors_deg, double threshold_deg = 10.0) {
  if (errors_deg.empty()) throw std::invalid_argument("success_rate: no errors given");
  if (!(threshold_deg > 0.0)) throw std::invalid_argument("success_rate: threshold must be positive");
  const auto hits = std::count_if(errors_deg.begin(), errors_deg.end(), [&](double e) { return e < threshold_deg; });
  return static_cast<double>(hits) / static_cast<double>(errors_deg.size());
}

/// Fraction of `consensus` flagged in `is_inlier`; 0 for an empty consensus.
inline double inlier_purity(std::span<const std::size_t> consensus, const std::vector<bool>& is_inlier) {
  if (consensus.empty()) return 0.0;
  const auto hits = std::count_if(consensus.begin(), consensus.end(),
                                  [&](std::size_t i) { return i < is_inlier.size() && is_inlier[i]; });
  return static_cast<double>(hits) / static_cast<double>(consensus.size());
}

/// Inlier flags for a candidate list: true where the candidate is planted.
inline std::vector<bool> planted_flags(std::span<const Correspondence> candidates, std::span<const Correspondence> truth) {
  std::vector<bool> flags(candidates.size(), false);
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    flags[t] = std::binary_search(truth.begin(), truth.end(), candidates[t]);
  }
  return flags;
}

inline std::vector<bool> index_flags(std::size_t size, std::span<const std::size_t> indices) {
  std::vector<bool> flags(size, false);
  for (const std::size_t i : indices) flags.at(i) = true;
  return flags;
}

/// Quadratic forms D = ZZᵀ with Z of size 4×2: inlier columns uniform on the
/// unit sphere of the hyperplane ⊥ w*, outlier columns uniform on S³.
struct QuadFormModel {
  std::vector<QuadForm> ds;
  std::vector<std::size_t> inliers;
  UnitQuaternion w_true;
};

inline QuadFormModel gen_quadform_model(std::size_t l, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k >= l) throw std::invalid_argument("gen_quadform_model: need 1 <= k < l");
  Rng rng(seed);
  auto sphere4 = [&rng]() {
    for (;;) {
      const Vector4 v(rng.normal(), rng.normal(), rng.normal(), rng.normal());
      const double n = v.norm();
      if (n > 1e-12) return Vector4(v / n);
    }
  };
  QuadFormModel model;
  model.w_true = UnitQuaternion(sphere4());
  const Vector4 w = model.w_true.coeffs();
  auto in_plane = [&]() {
    for (;;) {
      Vector4 v = sphere4();
      v -= w * w.dot(v);
      const double n = v.norm();
      if (n > 1e-6) return Vector4(v / n);
    }
  };
  model.ds.reserve(l);
  for (std::size_t i = 0; i < l; ++i) {
    Eigen::Matrix<double, 4, 2> z;
    if (i < k) {
      z.col(0) = in_plane();
      z.col(1) = in_plane();
      model.inliers.push_back(i);
    } else {
      z.col(0) = sphere4();
      z.col(1) = sphere4();
    }
    model.ds.push_back(QuadForm::from_root(z));
  }
  return model;
}

}  // namespace arcs
