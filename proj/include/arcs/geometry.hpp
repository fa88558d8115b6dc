#pragma once

// Rotation representations, conversions and the Wahba (Kabsch) solver.
//
// Quaternions are scalar-first: w = [w1, w2, w3, w4] with w1 the scalar part.
// The rotation attached to w is the matrix
//
//   | w1²+w2²−w3²−w4²   2(w2w3−w1w4)      2(w2w4+w1w3)    |
//   | 2(w2w3+w1w4)      w1²+w3²−w2²−w4²   2(w3w4−w1w2)    |
//   | 2(w2w4−w1w3)      2(w3w4+w1w2)      w1²+w4²−w2²−w3² |
//
// and w, −w give the same rotation.
//
// Rotation error is the geodesic angle on SO(3), in degrees:
//   arccos((trace(R_estᵀ R_true) − 1) / 2) · 180/π.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcs/errors.hpp"

namespace arcs {

using Point3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;
using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

/// A measurement pair (y, x), ideally related by y = R x.
struct PointPair {
  Point3 y;
  Point3 x;
};

using PairList = std::vector<PointPair>;

inline constexpr double kRotationTolerance = 1e-9;
inline constexpr double kQuaternionNormTolerance = 1e-12;
inline constexpr double kAxisNormTolerance = 1e-9;

inline Eigen::Matrix3d skew(const Point3& b) {
  Eigen::Matrix3d k;
  k << 0.0, -b.z(), b.y(),
       b.z(), 0.0, -b.x(),
       -b.y(), b.x(), 0.0;
  return k;
}

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = kRotationTolerance) {
  if (!r.allFinite()) return false;
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orth <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

/// Unit quaternion, scalar first. Construction checks the norm; use
/// `normalized` to build one from an arbitrary nonzero 4-vector.
class UnitQuaternion {
 public:
  UnitQuaternion() : w_(1.0, 0.0, 0.0, 0.0) {}

  explicit UnitQuaternion(const Vector4& w) : w_(w) {
    if (!w.allFinite() || std::abs(w.norm() - 1.0) > kQuaternionNormTolerance) {
      throw std::invalid_argument("quaternion is not unit-norm");
    }
  }

  UnitQuaternion(double w1, double w2, double w3, double w4)
      : UnitQuaternion(Vector4(w1, w2, w3, w4)) {}

  static UnitQuaternion normalized(const Vector4& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("cannot normalize a zero or non-finite quaternion");
    }
    UnitQuaternion q;
    q.w_ = v / n;
    return q;
  }

  const Vector4& coeffs() const noexcept { return w_; }
  double operator[](int k) const { return w_[k]; }

  UnitQuaternion operator-() const {
    UnitQuaternion q;
    q.w_ = -w_;
    return q;
  }

  /// Sign flipped so that the first nonzero component is positive.
  UnitQuaternion canonical() const {
    for (int k = 0; k < 4; ++k) {
      if (w_[k] > 0.0) return *this;
      if (w_[k] < 0.0) return -*this;
    }
    return *this;
  }

 private:
  Vector4 w_;
};

/// dist(w, ±w*) = min(‖w − w*‖, ‖w + w*‖).
inline double quaternion_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return std::min((a.coeffs() - b.coeffs()).norm(), (a.coeffs() + b.coeffs()).norm());
}

/// Axis b = [sinθ cosφ, sinθ sinφ, cosθ] with θ, φ ∈ [0, π] (so b₂ ≥ 0),
/// rotation angle ω ∈ [0, 2π].
struct AxisAngle {
  double theta = 0.0;
  double phi = 0.0;
  double omega = 0.0;

  Point3 axis() const { return axis_from_angles(theta, phi); }

  static Point3 axis_from_angles(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  }
};

/// R = bbᵀ + [b]ₓ sin ω + (I − bbᵀ) cos ω.
inline RotationMatrix rodrigues(const Point3& axis, double omega) {
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > kAxisNormTolerance) {
    throw std::invalid_argument("rodrigues: axis must be a unit vector");
  }
  const Eigen::Matrix3d bbt = axis * axis.transpose();
  return bbt + skew(axis) * std::sin(omega) + (Eigen::Matrix3d::Identity() - bbt) * std::cos(omega);
}

inline RotationMatrix quat_to_rotation(const UnitQuaternion& q) {
  const double w1 = q[0], w2 = q[1], w3 = q[2], w4 = q[3];
  RotationMatrix r;
  r << w1 * w1 + w2 * w2 - w3 * w3 - w4 * w4, 2.0 * (w2 * w3 - w1 * w4), 2.0 * (w2 * w4 + w1 * w3),
       2.0 * (w2 * w3 + w1 * w4), w1 * w1 + w3 * w3 - w2 * w2 - w4 * w4, 2.0 * (w3 * w4 - w1 * w2),
       2.0 * (w2 * w4 - w1 * w3), 2.0 * (w3 * w4 + w1 * w2), w1 * w1 + w4 * w4 - w2 * w2 - w3 * w3;
  return r;
}

/// Inverse of quat_to_rotation, canonical sign (first nonzero component > 0).
/// Uses the largest diagonal pivot for stability.
inline UnitQuaternion rotation_to_quat(const RotationMatrix& r) {
  if (!is_rotation(r)) throw std::invalid_argument("rotation_to_quat: input is not a rotation");
  const double tr = r.trace();
  Vector4 w;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w << 0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    w << (r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    w << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    w << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s;
  }
  return UnitQuaternion::normalized(w).canonical();
}

/// Geodesic angle between two rotations in degrees, in [0, 180]. Evaluated
/// as atan2(sin, cos) of the relative rotation M = R_estᵀ R_true, with
/// cos = (tr M − 1)/2 and sin = ‖vee(M − Mᵀ)‖/2; plain arccos loses about
/// 1e-6 degrees to rounding near zero.
inline double rotation_error_deg(const RotationMatrix& r_est, const RotationMatrix& r_true) {
  const Eigen::Matrix3d m = r_est.transpose() * r_true;
  const double c = (m.trace() - 1.0) / 2.0;
  const double s = 0.5 * Point3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)).norm();
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

/// argmin over SO(3) of Σ‖yᵢ − R xᵢ‖², via SVD of Σ yᵢ xᵢᵀ with the
/// determinant fix on the last singular vector.
inline RotationMatrix kabsch(std::span<const PointPair> pairs) {
  if (pairs.size() < 2) throw DegenerateConfiguration("kabsch: need at least 2 pairs");
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (const auto& p : pairs) h.noalias() += p.y * p.x.transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-9 * s(0)) {
    throw DegenerateConfiguration("kabsch: cross-covariance has rank < 2 (parallel or empty matches)");
  }
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return u * d.asDiagonal() * v.transpose();
}

inline RotationMatrix kabsch(const std::vector<PointPair>& pairs) {
  return kabsch(std::span<const PointPair>(pairs));
}

}  // namespace arcs
