#pragma once

// Rotation refinement on the unit-quaternion sphere S³.
//
// Each pair (y, x) gives a PSD 4×4 matrix D with wᵀDw = ‖y − R(w) x‖², so
// the robust L1 fit  min_R Σ‖yᵢ − R xᵢ‖  becomes  min_{w ∈ S³} h(w) with
// h(w) = Σ √(wᵀDᵢw).  refine() runs projected Riemannian subgradient descent
//
//   w ← (w − γₜ g) / ‖w − γₜ g‖,   g = (I − wwᵀ) ∂h(w),   γₜ = γ₀ βᵗ.
//
// Local linear convergence to ±w* needs a sharp minimum and an
// initialization inside its basin; neither the sharpness radius nor the
// basin can be checked at runtime, so the initialization is the caller's
// responsibility (normally the rotation from prune()).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcs/geometry.hpp"
#include "arcs/random.hpp"

namespace arcs {

/// Symmetric PSD 4×4 quadratic form.
class QuadForm {
 public:
  QuadForm() : d_(Matrix4::Zero()) {}

  explicit QuadForm(const Matrix4& d) : d_(d) {
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if (!d.allFinite() || (d - d.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("QuadForm: matrix must be finite and symmetric");
    }
  }

  /// D = Z Zᵀ.
  static QuadForm from_root(const Eigen::Matrix<double, 4, Eigen::Dynamic>& z) {
    return QuadForm(z * z.transpose());
  }

  const Matrix4& matrix() const noexcept { return d_; }

  double value(const Vector4& w) const { return w.dot(d_ * w); }

  QuadForm scaled(double s) const { return QuadForm(d_ * s); }

 private:
  Matrix4 d_;
};

/// D = (‖y‖² + ‖x‖²) I₄ − 2C with C = y₁X₁ + y₂X₂ + y₃X₃, where wᵀXₖw is the
/// k-th entry of R(w) x.
inline QuadForm build_D(const Point3& y, const Point3& x) {
  const double x1 = x.x(), x2 = x.y(), x3 = x.z();
  Matrix4 X1, X2, X3;
  X1 << x1, 0.0, x3, -x2,
        0.0, x1, x2, x3,
        x3, x2, -x1, 0.0,
        -x2, x3, 0.0, -x1;
  X2 << x2, -x3, 0.0, x1,
        -x3, -x2, x1, 0.0,
        0.0, x1, x2, x3,
        x1, 0.0, x3, -x2;
  X3 << x3, x2, -x1, 0.0,
        x2, -x3, 0.0, x1,
        -x1, 0.0, -x3, x2,
        0.0, x1, x2, x3;
  const Matrix4 c = y.x() * X1 + y.y() * X2 + y.z() * X3;
  return QuadForm((y.squaredNorm() + x.squaredNorm()) * Matrix4::Identity() - 2.0 * c);
}

inline std::vector<QuadForm> build_Ds(std::span<const PointPair> pairs) {
  std::vector<QuadForm> ds;
  ds.reserve(pairs.size());
  for (const auto& p : pairs) ds.push_back(build_D(p.y, p.x));
  return ds;
}

/// h(w) = Σ √max(wᵀDᵢw, 0).
inline double h_value(const UnitQuaternion& w, std::span<const QuadForm> ds) {
  double h = 0.0;
  for (const auto& d : ds) h += std::sqrt(std::max(d.value(w.coeffs()), 0.0));
  return h;
}

namespace detail {

inline constexpr double kSmoothThreshold = 1e-18;

inline Vector4 euclidean_subgradient(const Vector4& w, std::span<const QuadForm> ds) {
  Vector4 g = Vector4::Zero();
  for (const auto& d : ds) {
    const Vector4 dw = d.matrix() * w;
    const double q = w.dot(dw);
    if (q > kSmoothThreshold) g += dw / std::sqrt(q);
  }
  return g;
}

}  // namespace detail

/// (I − wwᵀ) Σᵢ Dᵢw / √(wᵀDᵢw); terms with wᵀDᵢw ≤ 1e-18 contribute zero.
inline Vector4 riemannian_subgradient(const UnitQuaternion& w, std::span<const QuadForm> ds) {
  const Vector4& v = w.coeffs();
  const Vector4 g = detail::euclidean_subgradient(v, ds);
  return g - v * v.dot(g);
}

struct RefineConfig {
  double gamma0 = 0.05;
  double beta = 0.92;
  int max_iterations = 300;
  double tol = 1e-10;

  void validate() const {
    if (!(gamma0 > 0.0)) throw std::invalid_argument("RefineConfig: gamma0 must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("RefineConfig: beta must lie in (0, 1)");
    if (max_iterations < 1) throw std::invalid_argument("RefineConfig: max_iterations must be >= 1");
    if (!(tol >= 0.0)) throw std::invalid_argument("RefineConfig: tol must be nonnegative");
  }
};

struct RefineStep {
  Vector4 w;
  double h = 0.0;
  double moved = 0.0;
};

struct RefineResult {
  UnitQuaternion w;
  std::vector<RefineStep> history;
  bool converged = false;

  std::size_t iterations() const noexcept { return history.size(); }
};

/// Riemannian subgradient descent on S³ with γₜ = γ₀βᵗ. The objective is
/// h/ℓ (same minimizers as h), so γ₀ does not need rescaling with ℓ. Stops
/// when γₜ‖g‖ < tol or after max_iterations.
inline RefineResult refine(std::span<const QuadForm> ds, const UnitQuaternion& w0,
                           const RefineConfig& cfg = {}) {
  cfg.validate();
  RefineResult result{w0, {}, false};
  if (ds.empty()) {
    result.converged = true;
    return result;
  }
  const double inv_l = 1.0 / static_cast<double>(ds.size());
  Vector4 w = w0.coeffs();
  double gamma = cfg.gamma0;
  result.history.reserve(static_cast<std::size_t>(cfg.max_iterations));

  for (int t = 0; t < cfg.max_iterations; ++t, gamma *= cfg.beta) {
    const Vector4 eg = detail::euclidean_subgradient(w, ds) * inv_l;
    const Vector4 g = eg - w * w.dot(eg);
    if (gamma * g.norm() < cfg.tol) {
      result.converged = true;
      break;
    }
    const Vector4 stepped = w - gamma * g;
    const double n = stepped.norm();
    // g is tangent at w, so ‖w − γg‖ ≥ 1 up to rounding.
    if (!(n >= 1.0 - 1e-9)) throw std::logic_error("refine: projection onto S^3 of a vanishing vector");
    const Vector4 next = stepped / n;
    result.history.push_back({next, 0.0, (next - w).norm()});
    w = next;
    result.history.back().h = h_value(UnitQuaternion::normalized(w), ds);
  }
  result.w = UnitQuaternion::normalized(w);
  return result;
}

/// Σᵢ √λ_max(Dᵢ), a Lipschitz constant of h on S³. Diagnostic only.
inline double lipschitz_estimate(std::span<const QuadForm> ds) {
  double l = 0.0;
  for (const auto& d : ds) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(d.matrix(), Eigen::EigenvaluesOnly);
    l += std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  }
  return l;
}

/// One-sided Monte-Carlo estimates of the sharpness constants:
///   η_min = (1/k) min over unit w ⊥ w* of Σ_{inliers} √(wᵀDᵢw)   (upper bound)
///   η_max = (1/(ℓ−k)) max over w ∈ S³ of Σ_{outliers} √(wᵀDᵢw)   (lower bound)
///   α*    = k η_min / √2 − (ℓ − k) η_max.
/// α* > 0 makes ±w* a sharp minimum of h in the noiseless case.
struct SharpnessReport {
  double eta_min = 0.0;
  double eta_max = 0.0;
  double alpha = 0.0;
  std::size_t samples = 0;
};

namespace detail {

inline double mean_root(std::span<const QuadForm> ds, const Vector4& w) {
  double s = 0.0;
  for (const auto& d : ds) s += std::sqrt(std::max(d.value(w), 0.0));
  return s / static_cast<double>(ds.size());
}

/// Local search on the unit sphere of span(basis): sign = +1 ascends, −1
/// descends. Returns the best objective value seen.
template <int Dim>
double sphere_local_search(std::span<const QuadForm> ds, const Eigen::Matrix<double, 4, Dim>& basis,
                           Eigen::Matrix<double, Dim, 1> u, double sign, int iterations) {
  using VecD = Eigen::Matrix<double, Dim, 1>;
  double best = mean_root(ds, basis * u);
  double gamma = 0.05;
  for (int t = 0; t < iterations; ++t, gamma *= 0.97) {
    const Vector4 w = basis * u;
    const VecD g_full = basis.transpose() * euclidean_subgradient(w, ds) / static_cast<double>(ds.size());
    const VecD g = g_full - u * u.dot(g_full);
    if (g.norm() == 0.0) break;
    u = (u + sign * gamma * g).normalized();
    const double f = mean_root(ds, basis * u);
    best = sign > 0 ? std::max(best, f) : std::min(best, f);
  }
  return best;
}

template <int Dim>
double sphere_extremum(std::span<const QuadForm> ds, const Eigen::Matrix<double, 4, Dim>& basis, double sign,
                       std::size_t n_samples, Rng& rng) {
  using VecD = Eigen::Matrix<double, Dim, 1>;
  struct Candidate {
    double f;
    VecD u;
  };
  std::vector<Candidate> cands;
  cands.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    VecD u;
    for (int d = 0; d < Dim; ++d) u[d] = rng.normal();
    u.normalize();
    cands.push_back({mean_root(ds, basis * u), u});
  }
  const std::size_t keep = std::min<std::size_t>(4, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    [sign](const Candidate& a, const Candidate& b) { return sign > 0 ? a.f > b.f : a.f < b.f; });
  double best = cands.front().f;
  for (std::size_t k = 0; k < keep; ++k) {
    const double f = sphere_local_search<Dim>(ds, basis, cands[k].u, sign, 200);
    best = sign > 0 ? std::max(best, f) : std::min(best, f);
  }
  return best;
}

}  // namespace detail

inline SharpnessReport estimate_sharpness(std::span<const QuadForm> ds, std::span<const std::size_t> inliers,
                                          const UnitQuaternion& w_true, std::size_t n_samples,
                                          std::uint64_t seed) {
  if (inliers.empty() || inliers.size() >= ds.size()) {
    throw std::invalid_argument("estimate_sharpness: inliers must be a nonempty proper subset");
  }
  if (n_samples == 0) throw std::invalid_argument("estimate_sharpness: n_samples must be positive");
  std::vector<bool> is_inlier(ds.size(), false);
  for (const std::size_t i : inliers) {
    if (i >= ds.size()) throw std::invalid_argument("estimate_sharpness: inlier index out of range");
    is_inlier[i] = true;
  }
  std::vector<QuadForm> in;
  std::vector<QuadForm> out;
  for (std::size_t i = 0; i < ds.size(); ++i) (is_inlier[i] ? in : out).push_back(ds[i]);

  // Orthonormal basis of the hyperplane ⊥ w*: the last three columns of the
  // Householder completion of w*.
  const Matrix4 q = Eigen::HouseholderQR<Vector4>(w_true.coeffs()).householderQ();
  const Eigen::Matrix<double, 4, 3> plane = q.rightCols<3>();

  Rng rng(seed);
  SharpnessReport rep;
  rep.samples = n_samples;
  rep.eta_min = detail::sphere_extremum<3>(in, plane, -1.0, n_samples, rng);
  rep.eta_max = detail::sphere_extremum<4>(out, Matrix4::Identity(), +1.0, n_samples, rng);
  const double k = static_cast<double>(in.size());
  const double o = static_cast<double>(out.size());
  rep.alpha = k * rep.eta_min / std::sqrt(2.0) - o * rep.eta_max;
  return rep;
}

}  // namespace arcs
