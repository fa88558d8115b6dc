#pragma once

// Interval stabbing: find a point lying in the largest number of closed
// intervals, where each measurement ("owner") may contribute a finite union
// of disjoint intervals. Sort-and-sweep in O(L log L) time, O(L) space.
//
// Ties: among coordinates of maximal depth the leftmost is returned, and at
// equal coordinates starts are processed before ends, so closed intervals
// that only touch still count as overlapping.
//
// Large inputs avoid a global sort: endpoints are bucketed and only buckets
// whose coverage bound can reach the optimum are sorted.

#include <boost/sort/spreadsort/float_sort.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace arcs {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Finite union of closed intervals owned by one measurement. Pieces are
/// kept sorted and pairwise disjoint; overlapping or touching pieces are
/// merged on construction.
class IntervalUnion {
 public:
  IntervalUnion() = default;

  IntervalUnion(std::size_t owner, std::vector<Interval> pieces)
      : owner_(owner), pieces_(std::move(pieces)) {
    for (const auto& p : pieces_) {
      if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi) {
        throw std::invalid_argument("IntervalUnion: pieces must be finite with lo <= hi");
      }
    }
    normalize();
  }

  std::size_t owner() const noexcept { return owner_; }
  const std::vector<Interval>& pieces() const noexcept { return pieces_; }
  bool empty() const noexcept { return pieces_.empty(); }

  bool contains(double x) const noexcept {
    return std::any_of(pieces_.begin(), pieces_.end(), [x](const Interval& p) { return p.contains(x); });
  }

 private:
  void normalize() {
    std::sort(pieces_.begin(), pieces_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
    std::vector<Interval> merged;
    merged.reserve(pieces_.size());
    for (const auto& p : pieces_) {
      if (!merged.empty() && p.lo <= merged.back().hi) {
        merged.back().hi = std::max(merged.back().hi, p.hi);
      } else {
        merged.push_back(p);
      }
    }
    pieces_ = std::move(merged);
  }

  std::size_t owner_ = 0;
  std::vector<Interval> pieces_;
};

/// Flat structure-of-arrays form for hot loops. Precondition: the intervals
/// sharing an owner are pairwise disjoint.
struct IntervalList {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> owner;

  void clear() {
    lo.clear();
    hi.clear();
    owner.clear();
  }

  void add(std::size_t who, double a, double b) {
    lo.push_back(a);
    hi.push_back(b);
    owner.push_back(who);
  }

  std::size_t size() const noexcept { return lo.size(); }
};

struct StabResult {
  double omega = 0.0;
  /// Owners with an interval containing omega, ascending.
  std::vector<std::size_t> stabbed;
};

/// Reusable scratch buffers for stab_max.
struct StabWorkspace {
  std::vector<double> starts;
  std::vector<double> ends;
  std::vector<std::int64_t> cover;
  std::vector<std::uint32_t> bucket_starts;
  std::vector<std::int32_t> slot;
  std::vector<std::size_t> start_offset;
  std::vector<std::size_t> end_offset;
};

namespace detail {

inline constexpr std::size_t kBucketedMinSize = 4096;

inline void collect_owners(const IntervalList& items, StabResult& result) {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items.lo[k] <= result.omega && result.omega <= items.hi[k]) result.stabbed.push_back(items.owner[k]);
  }
  std::sort(result.stabbed.begin(), result.stabbed.end());
  result.stabbed.erase(std::unique(result.stabbed.begin(), result.stabbed.end()), result.stabbed.end());
}

/// Sweep over sorted starts/ends. depth(x) = base + #{lo <= x} - #{hi < x};
/// it only rises at a start coordinate. Updates (best, omega) on strict improvement.
inline void sweep(const double* starts, std::size_t ns, const double* ends, std::size_t ne, std::int64_t base,
                  std::int64_t& best, double& omega) {
  std::size_t s = 0;
  std::size_t e = 0;
  while (s < ns) {
    const double x = starts[s];
    while (s < ns && starts[s] == x) ++s;
    while (e < ne && ends[e] < x) ++e;
    const auto depth = base + static_cast<std::int64_t>(s) - static_cast<std::int64_t>(e);
    if (depth > best) {
      best = depth;
      omega = x;
    }
  }
}

/// Reference path: sort all endpoints, sweep once.
inline double stab_point_sorted(const IntervalList& items, StabWorkspace& ws) {
  ws.starts.assign(items.lo.begin(), items.lo.end());
  ws.ends.assign(items.hi.begin(), items.hi.end());
  boost::sort::spreadsort::float_sort(ws.starts.begin(), ws.starts.end());
  boost::sort::spreadsort::float_sort(ws.ends.begin(), ws.ends.end());
  std::int64_t best = -1;
  double omega = 0.0;
  sweep(ws.starts.data(), ws.starts.size(), ws.ends.data(), ws.ends.size(), 0, best, omega);
  return omega;
}

/// Same answer as stab_point_sorted without a global sort. Endpoints map to
/// equal-width buckets through a monotone function, so an interval can only
/// contain points of the buckets between its endpoint buckets. That count
/// bounds the depth inside a bucket; only buckets whose bound reaches an
/// achievable depth have their endpoints gathered, sorted and swept.
inline double stab_point_bucketed(const IntervalList& items, StabWorkspace& ws) {
  const std::size_t n = items.size();
  const double x0 = *std::min_element(items.lo.begin(), items.lo.end());
  const double x1 = *std::max_element(items.hi.begin(), items.hi.end());
  if (!(x1 > x0)) return stab_point_sorted(items, ws);

  const std::size_t nb = std::clamp<std::size_t>(n / 16, 1, std::size_t{1} << 20);
  const double scale = static_cast<double>(nb) / (x1 - x0);
  const double last = static_cast<double>(nb - 1);
  const auto bucket = [=](double x) { return static_cast<std::size_t>(std::min(last, std::floor((x - x0) * scale))); };

  // cover[b] = #{k : bucket(lo_k) <= b <= bucket(hi_k)} after the prefix sum.
  ws.cover.assign(nb + 1, 0);
  ws.bucket_starts.assign(nb, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t bs = bucket(items.lo[k]);
    ++ws.cover[bs];
    --ws.cover[bucket(items.hi[k]) + 1];
    ++ws.bucket_starts[bs];
  }
  for (std::size_t b = 1; b < nb; ++b) ws.cover[b] += ws.cover[b - 1];

  // Gathers the endpoints of the buckets with slot[b] >= 0 into contiguous runs.
  std::size_t n_slots = 0;
  const auto gather = [&]() {
    ws.start_offset.assign(n_slots + 1, 0);
    ws.end_offset.assign(n_slots + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
      if (const auto t = ws.slot[bucket(items.lo[k])]; t >= 0) ++ws.start_offset[static_cast<std::size_t>(t) + 1];
      if (const auto t = ws.slot[bucket(items.hi[k])]; t >= 0) ++ws.end_offset[static_cast<std::size_t>(t) + 1];
    }
    for (std::size_t t = 0; t < n_slots; ++t) {
      ws.start_offset[t + 1] += ws.start_offset[t];
      ws.end_offset[t + 1] += ws.end_offset[t];
    }
    ws.starts.resize(ws.start_offset[n_slots]);
    ws.ends.resize(ws.end_offset[n_slots]);
    std::vector<std::size_t> fs(ws.start_offset.begin(), ws.start_offset.end() - 1);
    std::vector<std::size_t> fe(ws.end_offset.begin(), ws.end_offset.end() - 1);
    for (std::size_t k = 0; k < n; ++k) {
      if (const auto t = ws.slot[bucket(items.lo[k])]; t >= 0) ws.starts[fs[static_cast<std::size_t>(t)]++] = items.lo[k];
      if (const auto t = ws.slot[bucket(items.hi[k])]; t >= 0) ws.ends[fe[static_cast<std::size_t>(t)]++] = items.hi[k];
    }
  };
  const auto evaluate = [&](std::size_t b, std::size_t t, std::int64_t& best, double& omega) {
    double* s0 = ws.starts.data() + ws.start_offset[t];
    double* s1 = ws.starts.data() + ws.start_offset[t + 1];
    double* e0 = ws.ends.data() + ws.end_offset[t];
    double* e1 = ws.ends.data() + ws.end_offset[t + 1];
    std::sort(s0, s1);
    std::sort(e0, e1);
    // Intervals starting before bucket b and not yet ended.
    const std::int64_t base = ws.cover[b] - static_cast<std::int64_t>(ws.bucket_starts[b]);
    sweep(s0, static_cast<std::size_t>(s1 - s0), e0, static_cast<std::size_t>(e1 - e0), base, best, omega);
  };

  // A depth that is certainly achievable, from the bucket with the largest bound.
  std::size_t seed = nb;
  for (std::size_t b = 0; b < nb; ++b) {
    if (ws.bucket_starts[b] > 0 && (seed == nb || ws.cover[b] > ws.cover[seed])) seed = b;
  }
  ws.slot.assign(nb, -1);
  ws.slot[seed] = 0;
  n_slots = 1;
  gather();
  std::int64_t floor_depth = -1;
  double unused = 0.0;
  evaluate(seed, 0, floor_depth, unused);

  ws.slot[seed] = -1;
  n_slots = 0;
  std::vector<std::size_t> candidates;
  for (std::size_t b = 0; b < nb; ++b) {
    if (ws.bucket_starts[b] > 0 && ws.cover[b] >= floor_depth) {
      ws.slot[b] = static_cast<std::int32_t>(n_slots++);
      candidates.push_back(b);
    }
  }
  gather();
  std::int64_t best = -1;
  double omega = 0.0;
  for (std::size_t t = 0; t < candidates.size(); ++t) evaluate(candidates[t], t, best, omega);
  return omega;
}

}  // namespace detail

inline StabResult stab_max(const IntervalList& items, StabWorkspace& ws, bool with_owners = true) {
  StabResult result;
  if (items.size() == 0) return result;
  result.omega = items.size() < detail::kBucketedMinSize ? detail::stab_point_sorted(items, ws)
                                                          : detail::stab_point_bucketed(items, ws);
  if (with_owners) detail::collect_owners(items, result);
  return result;
}

inline StabResult stab_max(const IntervalList& items) {
  StabWorkspace ws;
  return stab_max(items, ws);
}

/// Point of maximal stabbing depth over a list of unions; each owner counts
/// at most once. Empty input (or only empty unions) gives (0, ∅).
inline StabResult stab_max(std::span<const IntervalUnion> items) {
  IntervalList flat;
  for (const auto& u : items) {
    for (const auto& p : u.pieces()) flat.add(u.owner(), p.lo, p.hi);
  }
  return stab_max(flat);
}

inline StabResult stab_max(const std::vector<IntervalUnion>& items) {
  return stab_max(std::span<const IntervalUnion>(items));
}

/// Number of owners whose union contains omega.
inline std::size_t stab_count_at(std::span<const IntervalUnion> items, double omega) {
  std::vector<std::size_t> owners;
  for (const auto& u : items) {
    if (u.contains(omega)) owners.push_back(u.owner());
  }
  std::sort(owners.begin(), owners.end());
  return static_cast<std::size_t>(std::unique(owners.begin(), owners.end()) - owners.begin());
}

inline std::size_t stab_count_at(const std::vector<IntervalUnion>& items, double omega) {
  return stab_count_at(std::span<const IntervalUnion>(items), omega);
}

}  // namespace arcs
