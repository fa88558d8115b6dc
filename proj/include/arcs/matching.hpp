#pragma once

// Norm-based correspondence search between two point clouds Q (size m) and
// P (size n). A rotation preserves norms, so an inlier pair (qᵢ, pⱼ) has
// ‖qᵢ‖ = ‖pⱼ‖ up to noise; both matchers work on the two norm-sorted lists.
//
// arcs_match is the two-cursor greedy sweep: it emits a pair and advances
// both cursors whenever |‖qᵢ‖ − ‖pⱼ‖| ≤ c, so its output is a partial
// matching. arcs_n_match instead emits every pair inside the band, using a
// sliding window over the sorted P norms; the window enumeration order is
// an implementation choice, and the result is returned sorted by (i, j).

#include <algorithm>
#include <compare>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arcs/errors.hpp"
#include "arcs/geometry.hpp"

namespace arcs {

/// Noiseless matching cannot use c = 0 literally: ‖R p‖ and ‖p‖ differ by a
/// few ulps after rounding (≤ 4e-15 for unit-scale Gaussian clouds).
inline constexpr double kNoiselessNormTolerance = 1e-14;

/// Norm threshold for noisy matching, in units of σ: an inlier satisfies
/// |‖qᵢ‖ − ‖pⱼ‖| ≤ 5.54σ with probability ≥ 1 − 10⁻⁶.
inline constexpr double kMatchSigmaFactor = 5.54;

class PointCloud {
 public:
  PointCloud() = default;

  explicit PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
    norms_.reserve(points_.size());
    for (const auto& p : points_) norms_.push_back(p.norm());
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point3>& points() const noexcept { return points_; }
  const std::vector<double>& norms() const noexcept { return norms_; }

  /// Indices ordered by ascending norm (index breaks ties).
  std::vector<std::size_t> norm_order() const {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
      return norms_[a] < norms_[b] || (norms_[a] == norms_[b] && a < b);
    });
    return order;
  }

 private:
  std::vector<Point3> points_;
  std::vector<double> norms_;
};

/// Index pair (i into Q, j into P).
struct Correspondence {
  std::size_t i = 0;
  std::size_t j = 0;

  friend auto operator<=>(const Correspondence&, const Correspondence&) = default;
};

using CorrespondenceSet = std::vector<Correspondence>;

inline CorrespondenceSet arcs_match(const PointCloud& q, const PointCloud& p, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("arcs_match: c must be nonnegative");
  CorrespondenceSet out;
  if (q.empty() || p.empty()) return out;

  const auto qo = q.norm_order();
  const auto po = p.norm_order();
  const auto& qn = q.norms();
  const auto& pn = p.norms();

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < qo.size() && j < po.size()) {
    const double d = qn[qo[i]] - pn[po[j]];
    if (d > c) {
      ++j;
    } else if (d < -c) {
      ++i;
    } else {
      out.push_back({qo[i], po[j]});
      ++i;
      ++j;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// (y, x) = (Q[i], P[j]) for every correspondence.
inline PairList pairs_from_correspondences(const PointCloud& q, const PointCloud& p,
                                           std::span<const Correspondence> matches) {
  PairList pairs;
  pairs.reserve(matches.size());
  for (const auto& m : matches) pairs.push_back({q[m.i], p[m.j]});
  return pairs;
}

struct ArcsSolution {
  RotationMatrix rotation;
  CorrespondenceSet matches;
};

/// A noiseless pair fits the rotation when ‖y − R x‖ ≤ this · (1 + ‖y‖).
inline constexpr double kNoiselessResidualTolerance = 1e-9;

namespace detail {

inline std::vector<bool> fits(const RotationMatrix& r, const PairList& pairs) {
  std::vector<bool> ok(pairs.size());
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    ok[a] = (pairs[a].y - r * pairs[a].x).norm() <= kNoiselessResidualTolerance * (1.0 + pairs[a].y.norm());
  }
  return ok;
}

inline std::size_t count(const std::vector<bool>& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

/// Largest subset of matches consistent with one rotation. With few matches
/// every two-pair rotation is tried; otherwise residual trimming from the
/// all-pairs fit.
inline std::vector<bool> consistent_subset(const PairList& pairs, std::size_t exhaustive_limit = 256) {
  std::vector<bool> best(pairs.size(), false);
  if (pairs.size() <= exhaustive_limit) {
    std::size_t best_n = 0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      for (std::size_t b = a + 1; b < pairs.size(); ++b) {
        const PointPair two[2] = {pairs[a], pairs[b]};
        RotationMatrix r;
        try {
          r = kabsch(std::span<const PointPair>(two));
        } catch (const DegenerateConfiguration&) {
          continue;
        }
        auto ok = fits(r, pairs);
        const std::size_t n = count(ok);
        if (n > best_n) {
          best_n = n;
          best = std::move(ok);
        }
      }
    }
    return best;
  }
  // Trim against 3× the median residual until the kept set fits noiselessly.
  std::vector<bool> keep(pairs.size(), true);
  for (int round = 0; round < 16 && count(keep) >= 2; ++round) {
    PairList kept;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      if (keep[a]) kept.push_back(pairs[a]);
    }
    const RotationMatrix r = kabsch(kept);
    auto ok = fits(r, pairs);
    if (count(ok) >= kept.size()) return ok;
    std::vector<double> res(pairs.size());
    for (std::size_t a = 0; a < pairs.size(); ++a) res[a] = (pairs[a].y - r * pairs[a].x).norm();
    std::vector<double> kept_res;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      if (keep[a]) kept_res.push_back(res[a]);
    }
    auto mid = kept_res.begin() + static_cast<std::ptrdiff_t>(kept_res.size() / 2);
    std::nth_element(kept_res.begin(), mid, kept_res.end());
    const double cut = 3.0 * *mid;
    for (std::size_t a = 0; a < pairs.size(); ++a) keep[a] = ok[a] || res[a] <= cut;
  }
  return std::vector<bool>(pairs.size(), false);
}

}  // namespace detail

/// Noiseless simultaneous rotation and correspondence search: match norms,
/// then fit the rotation to all matched pairs. An outlier whose norms agree
/// to rounding (possible at m ≈ 10⁶) would bias that fit, so if any match
/// has a non-noiseless residual the largest mutually consistent subset is
/// kept and refit, and `matches` holds only that subset.
inline ArcsSolution arcs_solve(const PointCloud& q, const PointCloud& p,
                               double c = kNoiselessNormTolerance) {
  ArcsSolution sol;
  sol.matches = arcs_match(q, p, c);
  if (sol.matches.size() < 2) {
    throw DegenerateConfiguration("arcs_solve: fewer than 2 norm matches");
  }
  const auto pairs = pairs_from_correspondences(q, p, sol.matches);
  sol.rotation = kabsch(pairs);
  const auto ok = detail::fits(sol.rotation, pairs);
  if (detail::count(ok) == pairs.size()) return sol;

  const auto keep = detail::consistent_subset(pairs);
  if (detail::count(keep) < 2) {
    throw DegenerateConfiguration("arcs_solve: no two matches agree on a rotation");
  }
  CorrespondenceSet kept;
  PairList kept_pairs;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    if (!keep[a]) continue;
    kept.push_back(sol.matches[a]);
    kept_pairs.push_back(pairs[a]);
  }
  sol.rotation = kabsch(kept_pairs);
  sol.matches = std::move(kept);
  return sol;
}

/// Every (i, j) with |‖qᵢ‖ − ‖pⱼ‖| ≤ c, sorted lexicographically.
inline CorrespondenceSet arcs_n_match(const PointCloud& q, const PointCloud& p, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("arcs_n_match: c must be positive");
  CorrespondenceSet out;
  if (q.empty() || p.empty()) return out;

  const auto qo = q.norm_order();
  const auto po = p.norm_order();
  const auto& qn = q.norms();
  const auto& pn = p.norms();

  // Window [lo, hi) into the sorted P list, per original Q index.
  std::vector<std::pair<std::size_t, std::size_t>> window(q.size());
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t total = 0;
  for (const std::size_t i : qo) {
    const double r = qn[i];
    while (lo < po.size() && r - pn[po[lo]] > c) ++lo;
    hi = std::max(hi, lo);
    while (hi < po.size() && r - pn[po[hi]] >= -c) ++hi;
    window[i] = {lo, hi};
    total += hi - lo;
  }

  out.reserve(total);
  std::vector<std::size_t> js;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto [a, b] = window[i];
    js.assign(po.begin() + static_cast<std::ptrdiff_t>(a), po.begin() + static_cast<std::ptrdiff_t>(b));
    std::sort(js.begin(), js.end());
    for (const std::size_t j : js) out.push_back({i, j});
  }
  return out;
}

}  // namespace arcs
