#pragma once

// Approximate consensus maximization over SO(3):
//
//   max |I|  s.t.  ‖yᵢ − R xᵢ‖ ≤ c  for i ∈ I.
//
// With vᵢ = yᵢ − xᵢ, every inlier satisfies |vᵢᵀb*| ≤ c̄ for the true axis b*
// (the angle drops out), so the search splits into three one-dimensional
// steps: sample the axis longitude φ on a uniform grid, stab the axis
// latitude θ for each φ, then stab the rotation angle ω around the axis
// found. The candidate with the largest angle consensus wins (smallest grid
// index on ties). No optimality guarantee comes with the φ grid; s is exposed
// for sensitivity studies.
//
// Both interval builders return closed unions whose endpoints come from
// arccos; the stabbing point is always such an endpoint, so members of the
// returned consensus sit on the residual bound up to rounding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcs/geometry.hpp"
#include "arcs/parallel.hpp"
#include "arcs/stabbing.hpp"

namespace arcs {

/// Axis-stage threshold in units of σ: |vᵢᵀb*| ≤ 4.9σ with probability ≥ 1 − 10⁻⁶.
inline constexpr double kAxisSigmaFactor = 4.9;
/// Residual threshold in units of σ: ‖yᵢ − R*xᵢ‖ ≤ 5.54σ with probability ≥ 1 − 10⁻⁶.
inline constexpr double kResidualSigmaFactor = 5.54;
inline constexpr int kDefaultPhiSamples = 90;

namespace detail {

/// Up to three pieces, sorted and merged; no heap traffic in hot loops.
struct Pieces {
  std::array<Interval, 3> p{};
  int n = 0;

  void push(double lo, double hi) {
    if (lo <= hi) p[n++] = {lo, hi};
  }

  void normalize() {
    std::sort(p.begin(), p.begin() + n, [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    int m = 0;
    for (int k = 0; k < n; ++k) {
      if (m > 0 && p[k].lo <= p[m - 1].hi) {
        p[m - 1].hi = std::max(p[m - 1].hi, p[k].hi);
      } else {
        p[m++] = p[k];
      }
    }
    n = m;
  }

  std::vector<Interval> to_vector() const { return {p.begin(), p.begin() + n}; }
};

inline Pieces axis_pieces(const Point3& v, double cos_phi, double sin_phi, double cbar) {
  constexpr double pi = std::numbers::pi;
  Pieces out;
  if (v.squaredNorm() < 1e-24) {
    out.push(0.0, pi);
    return out;
  }
  double a1 = v.x() * cos_phi + v.y() * sin_phi;
  double v3 = v.z();
  if (a1 < 0.0) {
    a1 = -a1;
    v3 = -v3;
  }
  const double rho = std::sqrt(a1 * a1 + v3 * v3);
  if (rho <= cbar) {
    out.push(0.0, pi);
    return out;
  }
  const double ci = cbar / rho;
  const double a2 = std::atan2(a1, v3);
  // arccos(−cᵢ) = π − arccos(cᵢ)
  const double a4 = std::acos(ci);
  const double a3 = pi - a4;
  out.push(std::max(0.0, a2 - a3), std::min(pi, a2 - a4));
  out.push(std::max(0.0, a2 + a4), std::min(pi, a2 + a3));
  out.normalize();
  return out;
}

inline Pieces angle_pieces(const Point3& y, const Point3& x, const Point3& b, double c) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Pieces out;
  const double a9 = y.dot(b) * b.dot(x);
  const double a10 = y.dot(b.cross(x));
  const double a11 = y.dot(x) - a9;
  const double a12 = 0.5 * (y.squaredNorm() + x.squaredNorm() - c * c) - a9;
  const double r2 = a10 * a10 + a11 * a11;
  if (r2 < 1e-24) {
    if (a12 <= 0.0) out.push(0.0, two_pi);
    return out;
  }
  const double r = std::sqrt(r2);
  double a13 = std::atan2(a10, a11);
  if (a13 < 0.0) a13 += two_pi;
  if (a13 >= two_pi) a13 = 0.0;
  const double a14 = std::max(a12 / r, -1.0);
  if (a14 > 1.0) return out;
  const double a15 = std::acos(a14);
  out.push(std::max(0.0, a13 - a15), std::min(two_pi, a13 + a15));
  out.push(a13 - a15 + two_pi, two_pi);
  out.push(0.0, a13 + a15 - two_pi);
  out.normalize();
  return out;
}

/// A pair can only meet ‖y − R x‖ ≤ c for some R about b if |(y − x)ᵀb| ≤ c,
/// since Rᵀb = b. The slack keeps the skip strictly inside the empty case.
inline bool may_meet_angle_bound(const Point3& v, const Point3& b, double c) {
  return std::abs(v.dot(b)) <= c * (1.0 + 1e-6);
}

struct ThetaStab {
  double theta = 0.0;
  std::vector<std::size_t> consensus;
};

inline ThetaStab stab_theta(std::span<const Point3> vs, double phi, double cbar, IntervalList& list,
                            StabWorkspace& ws, bool with_consensus = true) {
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  list.clear();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Pieces pc = axis_pieces(vs[i], cp, sp, cbar);
    for (int k = 0; k < pc.n; ++k) list.add(i, pc.p[k].lo, pc.p[k].hi);
  }
  StabResult r = stab_max(list, ws, with_consensus);
  return {r.omega, std::move(r.stabbed)};
}

inline StabResult stab_omega(std::span<const PointPair> pairs, std::span<const Point3> vs, const Point3& b,
                             double c, IntervalList& list, StabWorkspace& ws) {
  list.clear();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!vs.empty() && !may_meet_angle_bound(vs[i], b, c)) continue;
    const Pieces pc = angle_pieces(pairs[i].y, pairs[i].x, b, c);
    for (int k = 0; k < pc.n; ++k) list.add(i, pc.p[k].lo, pc.p[k].hi);
  }
  return stab_max(list, ws);
}

inline std::vector<Point3> differences(std::span<const PointPair> pairs) {
  std::vector<Point3> vs;
  vs.reserve(pairs.size());
  for (const auto& p : pairs) vs.push_back(p.y - p.x);
  return vs;
}

inline void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace detail

/// θ ∈ [0, π] with |vᵀb(θ, φ)| ≤ c̄, where b(θ, φ) = [sinθ cosφ, sinθ sinφ, cosθ].
inline IntervalUnion axis_intervals(const Point3& v, double phi, double cbar, std::size_t owner = 0) {
  detail::check_positive(cbar, "axis_intervals: cbar");
  if (!(phi >= 0.0 && phi <= std::numbers::pi)) throw std::invalid_argument("axis_intervals: phi must lie in [0, pi]");
  return {owner, detail::axis_pieces(v, std::cos(phi), std::sin(phi), cbar).to_vector()};
}

/// ω ∈ [0, 2π] with ‖y − rodrigues(b, ω) x‖ ≤ c. May be empty.
inline IntervalUnion angle_intervals(const Point3& y, const Point3& x, const Point3& b, double c,
                                     std::size_t owner = 0) {
  detail::check_positive(c, "angle_intervals: c");
  if (std::abs(b.norm() - 1.0) > kAxisNormTolerance) throw std::invalid_argument("angle_intervals: b must be unit");
  return {owner, detail::angle_pieces(y, x, b, c).to_vector()};
}

struct ThetaResult {
  double theta = 0.0;
  std::vector<std::size_t> consensus;
};

inline ThetaResult solve_theta_given_phi(std::span<const PointPair> pairs, double phi, double cbar) {
  detail::check_positive(cbar, "solve_theta_given_phi: cbar");
  const auto vs = detail::differences(pairs);
  IntervalList list;
  StabWorkspace ws;
  auto r = detail::stab_theta(vs, phi, cbar, list, ws);
  return {r.theta, std::move(r.consensus)};
}

struct OmegaResult {
  double omega = 0.0;
  std::vector<std::size_t> consensus;
};

inline OmegaResult solve_omega_given_axis(std::span<const PointPair> pairs, const Point3& b, double c) {
  detail::check_positive(c, "solve_omega_given_axis: c");
  if (std::abs(b.norm() - 1.0) > kAxisNormTolerance) throw std::invalid_argument("solve_omega_given_axis: b must be unit");
  const auto vs = detail::differences(pairs);
  IntervalList list;
  StabWorkspace ws;
  auto r = detail::stab_omega(pairs, vs, b, c, list, ws);
  return {r.omega, std::move(r.stabbed)};
}

struct ConsensusResult {
  RotationMatrix rotation = RotationMatrix::Identity();
  AxisAngle axis_angle;
  std::vector<std::size_t> consensus;
  /// Index of the winning φ sample.
  std::size_t sample = 0;

  std::size_t cardinality() const noexcept { return consensus.size(); }
};

/// φⱼ = (2j − 1)π / (2s), j = 1..s.
inline std::vector<double> phi_grid(int s) {
  if (s < 1) throw std::invalid_argument("phi_grid: s must be >= 1");
  std::vector<double> phis(static_cast<std::size_t>(s));
  for (int j = 1; j <= s; ++j) phis[static_cast<std::size_t>(j - 1)] = (2.0 * j - 1.0) * std::numbers::pi / (2.0 * s);
  return phis;
}

/// Consensus search over an explicit set of φ samples.
inline ConsensusResult prune_over(std::span<const PointPair> pairs, double c, double cbar,
                                  std::span<const double> phis) {
  detail::check_positive(c, "prune: c");
  detail::check_positive(cbar, "prune: cbar");
  if (pairs.empty()) throw std::invalid_argument("prune: need at least one pair");
  if (phis.empty()) throw std::invalid_argument("prune: need at least one phi sample");

  const auto vs = detail::differences(pairs);
  struct Workspace {
    IntervalList list;
    StabWorkspace ws;
  };
  std::vector<Workspace> spaces(std::min<std::size_t>(max_threads(), phis.size()));
  std::vector<ConsensusResult> candidates(phis.size());

  parallel_for(phis.size(), [&](unsigned worker, std::size_t j) {
    auto& [list, ws] = spaces[worker];
    const double phi = phis[j];
    const auto theta = detail::stab_theta(vs, phi, cbar, list, ws, false);
    const Point3 b = AxisAngle::axis_from_angles(theta.theta, phi);
    auto omega = detail::stab_omega(pairs, vs, b, c, list, ws);
    auto& out = candidates[j];
    out.axis_angle = {theta.theta, phi, omega.omega};
    out.rotation = rodrigues(b, omega.omega);
    out.consensus = std::move(omega.stabbed);
    out.sample = j;
  });

  std::size_t best = 0;
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    if (candidates[j].cardinality() > candidates[best].cardinality()) best = j;
  }
  return std::move(candidates[best]);
}

inline ConsensusResult prune(std::span<const PointPair> pairs, double c, double cbar,
                             int s = kDefaultPhiSamples) {
  const auto phis = phi_grid(s);
  return prune_over(pairs, c, cbar, phis);
}

}  // namespace arcs
